#pragma once

#include "seqdml/common.hpp"
#include "seqdml/panel.hpp"
#include "seqdml/policy.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace seqdml {

// ---------------------------------------------------------------------------
// Linear-Gaussian two-period DGP with switchable confounding pathways.
//
// Structural order: X0 -> D1 -> X1 -> D2 -> Y. The three switches control the
// feedback arrows D1->X1, X1->D2 and X1->Y; with all three on the data are
// dynamically confounded, with any one off confounding is static. Switching a
// pathway off zeroes the corresponding coefficient blocks exactly.
// ---------------------------------------------------------------------------
struct DgpConfig {
    int n = 1000;
    int p0 = 2;
    int n_treat1 = 2;
    int n_treat2 = 2;
    int p1_cont = 1;  // continuous X1 columns; the binary V1 column is appended after them

    Vector d1_intercept;  // n_treat1
    Matrix d1_x0_coef;    // n_treat1 x p0

    Matrix x1_x0_coef;   // p1_cont x p0
    Matrix x1_d1_shift;  // p1_cont x n_treat1   [d1_to_x1]
    double x1_noise_sd = 1.0;

    double v1_intercept = 0.0;
    Vector v1_x0_coef;   // p0
    Vector v1_d1_shift;  // n_treat1             [d1_to_x1]

    Vector d2_intercept;  // n_treat2
    Matrix d2_x0_coef;    // n_treat2 x p0
    Matrix d2_x1_coef;    // n_treat2 x (p1_cont + 1)   [x1_to_d2]
    Matrix d2_d1_shift;   // n_treat2 x n_treat1

    double y_intercept = 0.0;
    Vector y_x0_coef;       // p0
    Vector y_x1_coef;       // p1_cont + 1        [x1_to_y]
    Vector y_d1_effect;     // n_treat1
    Vector y_d2_effect;     // n_treat2
    Matrix y_d1d2_effect;   // n_treat1 x n_treat2
    Vector y_v1_d2_effect;  // n_treat2            [x1_to_y]
    double y_noise_sd = 1.0;

    bool d1_to_x1 = true;
    bool x1_to_d2 = true;
    bool x1_to_y = true;

    int z0_groups = 0;  // groups cut from quantiles of x0 column 0
    std::uint64_t seed = 0;

    int p1() const { return p1_cont + 1; }
    int v1_col() const { return p1_cont; }

    void validate() const {
        if (n <= 0 || p0 <= 0 || n_treat1 < 1 || n_treat2 < 1 || p1_cont < 0)
            throw ConfigError("dgp: sizes must be positive");
        auto want = [&](bool ok, const std::string& what) {
            if (!ok) throw ConfigError("dgp: coefficient block " + what + " has the wrong shape");
        };
        want(d1_intercept.size() == n_treat1, "d1_intercept");
        want(d1_x0_coef.rows() == n_treat1 && d1_x0_coef.cols() == p0, "d1_x0_coef");
        want(x1_x0_coef.rows() == p1_cont && (p1_cont == 0 || x1_x0_coef.cols() == p0), "x1_x0_coef");
        want(x1_d1_shift.rows() == p1_cont && (p1_cont == 0 || x1_d1_shift.cols() == n_treat1),
             "x1_d1_shift");
        want(v1_x0_coef.size() == p0, "v1_x0_coef");
        want(v1_d1_shift.size() == n_treat1, "v1_d1_shift");
        want(d2_intercept.size() == n_treat2, "d2_intercept");
        want(d2_x0_coef.rows() == n_treat2 && d2_x0_coef.cols() == p0, "d2_x0_coef");
        want(d2_x1_coef.rows() == n_treat2 && d2_x1_coef.cols() == p1(), "d2_x1_coef");
        want(d2_d1_shift.rows() == n_treat2 && d2_d1_shift.cols() == n_treat1, "d2_d1_shift");
        want(y_x0_coef.size() == p0, "y_x0_coef");
        want(y_x1_coef.size() == p1(), "y_x1_coef");
        want(y_d1_effect.size() == n_treat1, "y_d1_effect");
        want(y_d2_effect.size() == n_treat2, "y_d2_effect");
        want(y_d1d2_effect.rows() == n_treat1 && y_d1d2_effect.cols() == n_treat2, "y_d1d2_effect");
        want(y_v1_d2_effect.size() == n_treat2, "y_v1_d2_effect");
        if (x1_noise_sd < 0.0 || y_noise_sd < 0.0) throw ConfigError("dgp: noise sd must be >= 0");
    }

    // Zero-filled coefficient blocks of the right shapes; tests then set only
    // the pathways they need.
    static DgpConfig zeroed(int n, int p0, int n_treat1, int n_treat2, int p1_cont) {
        DgpConfig cfg;
        cfg.n = n;
        cfg.p0 = p0;
        cfg.n_treat1 = n_treat1;
        cfg.n_treat2 = n_treat2;
        cfg.p1_cont = p1_cont;
        cfg.d1_intercept = Vector::Zero(n_treat1);
        cfg.d1_x0_coef = Matrix::Zero(n_treat1, p0);
        cfg.x1_x0_coef = Matrix::Zero(p1_cont, p0);
        cfg.x1_d1_shift = Matrix::Zero(p1_cont, n_treat1);
        cfg.v1_x0_coef = Vector::Zero(p0);
        cfg.v1_d1_shift = Vector::Zero(n_treat1);
        cfg.d2_intercept = Vector::Zero(n_treat2);
        cfg.d2_x0_coef = Matrix::Zero(n_treat2, p0);
        cfg.d2_x1_coef = Matrix::Zero(n_treat2, p1_cont + 1);
        cfg.d2_d1_shift = Matrix::Zero(n_treat2, n_treat1);
        cfg.y_x0_coef = Vector::Zero(p0);
        cfg.y_x1_coef = Vector::Zero(p1_cont + 1);
        cfg.y_d1_effect = Vector::Zero(n_treat1);
        cfg.y_d2_effect = Vector::Zero(n_treat2);
        cfg.y_d1d2_effect = Matrix::Zero(n_treat1, n_treat2);
        cfg.y_v1_d2_effect = Vector::Zero(n_treat2);
        return cfg;
    }

    DgpConfig effective() const {
        DgpConfig eff = *this;
        if (!d1_to_x1) {
            eff.x1_d1_shift.setZero();
            eff.v1_d1_shift.setZero();
        }
        if (!x1_to_d2) eff.d2_x1_coef.setZero();
        if (!x1_to_y) {
            eff.y_x1_coef.setZero();
            eff.y_v1_d2_effect.setZero();
        }
        return eff;
    }
};

namespace detail {

inline int sample_class_from_logits(const Vector& logits, Rng& rng) {
    const double m = logits.maxCoeff();
    Vector w = (logits.array() - m).exp();
    const double total = w.sum();
    double u = rng.uniform() * total;
    for (Eigen::Index c = 0; c < w.size(); ++c) {
        u -= w(c);
        if (u <= 0.0) return static_cast<int>(c);
    }
    return static_cast<int>(w.size()) - 1;
}

inline Vector softmax(const Vector& logits) {
    const double m = logits.maxCoeff();
    Vector w = (logits.array() - m).exp();
    return w / w.sum();
}

// Standard normal quantile by bisection; only used to cut z0 groups.
inline double normal_quantile(double p) {
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
        (cdf < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

struct SimulatedPanel {
    PanelDataset panel;
    DgpConfig effective_cfg;  // switches already applied; oracles read from here
};

namespace detail {

inline Vector d1_logits(const DgpConfig& cfg, const Eigen::RowVectorXd& x0) {
    return cfg.d1_intercept + cfg.d1_x0_coef * x0.transpose();
}

inline Vector d2_logits(const DgpConfig& cfg, const Eigen::RowVectorXd& x0,
                        const Eigen::RowVectorXd& x1, int d1) {
    return cfg.d2_intercept + cfg.d2_x0_coef * x0.transpose() + cfg.d2_x1_coef * x1.transpose() +
           cfg.d2_d1_shift.col(d1);
}

inline double v1_prob(const DgpConfig& cfg, const Eigen::RowVectorXd& x0, int d1) {
    return sigmoid(cfg.v1_intercept + cfg.v1_x0_coef.dot(x0) + cfg.v1_d1_shift(d1));
}

inline double outcome_mean(const DgpConfig& cfg, const Eigen::RowVectorXd& x0,
                           const Eigen::RowVectorXd& x1, int d1, int d2) {
    return cfg.y_intercept + cfg.y_x0_coef.dot(x0) + cfg.y_x1_coef.dot(x1) + cfg.y_d1_effect(d1) +
           cfg.y_d2_effect(d2) + cfg.y_d1d2_effect(d1, d2) + cfg.y_v1_d2_effect(d2) * x1(cfg.v1_col());
}

}  // namespace detail

inline SimulatedPanel generate(const DgpConfig& cfg) {
    cfg.validate();
    const DgpConfig eff = cfg.effective();
    const int n = eff.n;

    Rng rng(derive_seed(eff.seed, 0xD6B));

    PanelDataset ds;
    ds.x0.resize(n, eff.p0);
    ds.x1.resize(n, eff.p1());
    ds.d1.resize(n);
    ds.d2.resize(n);
    ds.y.resize(n);

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < eff.p0; ++j) ds.x0(i, j) = rng.normal();

    for (int i = 0; i < n; ++i) {
        const Eigen::RowVectorXd x0 = ds.x0.row(i);
        ds.d1(i) = detail::sample_class_from_logits(detail::d1_logits(eff, x0), rng);

        for (int j = 0; j < eff.p1_cont; ++j)
            ds.x1(i, j) = eff.x1_x0_coef.row(j).dot(x0) + eff.x1_d1_shift(j, ds.d1(i)) +
                          eff.x1_noise_sd * rng.normal();
        ds.x1(i, eff.v1_col()) = rng.bernoulli(detail::v1_prob(eff, x0, ds.d1(i))) ? 1.0 : 0.0;

        const Eigen::RowVectorXd x1 = ds.x1.row(i);
        ds.d2(i) = detail::sample_class_from_logits(detail::d2_logits(eff, x0, x1, ds.d1(i)), rng);
        ds.y(i) = detail::outcome_mean(eff, x0, x1, ds.d1(i), ds.d2(i)) + eff.y_noise_sd * rng.normal();
    }

    ds.n_treat1 = eff.n_treat1;
    ds.n_treat2 = eff.n_treat2;
    ds.y1_col = eff.v1_col();
    for (int j = 0; j < eff.p0; ++j) ds.x0_names.push_back("x0_" + std::to_string(j));
    for (int j = 0; j < eff.p1_cont; ++j) ds.x1_names.push_back("x1_" + std::to_string(j));
    ds.x1_names.push_back("v1");

    if (eff.z0_groups > 1) {
        IntVector z(n);
        std::vector<double> cuts;
        for (int g = 1; g < eff.z0_groups; ++g)
            cuts.push_back(detail::normal_quantile(static_cast<double>(g) / eff.z0_groups));
        for (int i = 0; i < n; ++i) {
            int g = 0;
            while (g < static_cast<int>(cuts.size()) && ds.x0(i, 0) > cuts[static_cast<std::size_t>(g)])
                ++g;
            z(i) = g;
        }
        ds.z0 = std::move(z);
    }

    ds.validate();
    return SimulatedPanel{std::move(ds), eff};
}

// True nuisance functions evaluated on a generated panel, used by the test
// harnesses only. Estimator code reaches ground truth exclusively through
// these accessors.
struct OracleNuisance {
    Vector p1;  // true P(D1 = g1 | X0)
    Vector p2;  // true P(D2 = g2 | X0, X1, D1 = g1)
    Vector mu;  // true E[Y | X0, X1, D1 = g1, D2 = g2]
    Vector nu;  // true E[mu | X0, D1 = g1]
};

inline OracleNuisance oracle_nuisance(const DgpConfig& eff, const PanelDataset& ds, const Policy& pol) {
    const PolicyTargets targets = policy_targets(ds, pol);
    const int n = ds.n();
    OracleNuisance out;
    out.p1.resize(n);
    out.p2.resize(n);
    out.mu.resize(n);
    out.nu.resize(n);

    for (int i = 0; i < n; ++i) {
        const Eigen::RowVectorXd x0 = ds.x0.row(i);
        const Eigen::RowVectorXd x1 = ds.x1.row(i);
        const int g1 = targets.g1(i);
        const int g2 = targets.g2(i);

        out.p1(i) = detail::softmax(detail::d1_logits(eff, x0))(g1);
        out.p2(i) = detail::softmax(detail::d2_logits(eff, x0, x1, g1))(g2);
        out.mu(i) = detail::outcome_mean(eff, x0, x1, g1, g2);

        // nu integrates mu over X1 | X0, D1 = g1: the continuous block enters
        // linearly so only its mean matters, the V1 branch is a two-point sum.
        Eigen::RowVectorXd x1_mean(eff.p1());
        for (int j = 0; j < eff.p1_cont; ++j)
            x1_mean(j) = eff.x1_x0_coef.row(j).dot(x0) + eff.x1_d1_shift(j, g1);
        const double q = detail::v1_prob(eff, x0, g1);
        double nu = 0.0;
        for (int v = 0; v <= 1; ++v) {
            x1_mean(eff.v1_col()) = static_cast<double>(v);
            const int d2v = (v == 1 && pol.is_dynamic()) ? pol.d2_if_v1_one : pol.d2_if_v1_zero;
            nu += (v == 1 ? q : 1.0 - q) * detail::outcome_mean(eff, x0, x1_mean, g1, d2v);
        }
        out.nu(i) = nu;
    }
    return out;
}

struct OracleEstimate {
    double truth = 0.0;
    double mc_se = 0.0;
};

// Monte-Carlo average potential outcome: simulate counterfactual trajectories
// with the treatment path forced to the policy.
inline OracleEstimate oracle_apo_mc(const DgpConfig& cfg, const Policy& pol, int replications,
                                    std::uint64_t seed) {
    cfg.validate();
    if (replications < 1000) throw ConfigError("oracle_apo_mc: need at least 1000 replications");
    const DgpConfig eff = cfg.effective();
    Rng rng(derive_seed(seed, 0x0AC1E));

    double sum = 0.0, sum_sq = 0.0;
    Eigen::RowVectorXd x0(eff.p0), x1(eff.p1());
    for (int r = 0; r < replications; ++r) {
        for (int j = 0; j < eff.p0; ++j) x0(j) = rng.normal();
        const int d1 = pol.d1_target;
        for (int j = 0; j < eff.p1_cont; ++j)
            x1(j) = eff.x1_x0_coef.row(j).dot(x0) + eff.x1_d1_shift(j, d1) +
                    eff.x1_noise_sd * rng.normal();
        const int v1 = rng.bernoulli(detail::v1_prob(eff, x0, d1)) ? 1 : 0;
        x1(eff.v1_col()) = static_cast<double>(v1);
        const int d2 = (v1 == 1 && pol.is_dynamic()) ? pol.d2_if_v1_one : pol.d2_if_v1_zero;
        const double y = detail::outcome_mean(eff, x0, x1, d1, d2) + eff.y_noise_sd * rng.normal();
        sum += y;
        sum_sq += y * y;
    }
    OracleEstimate est;
    est.truth = sum / replications;
    const double var = std::max(0.0, sum_sq / replications - est.truth * est.truth);
    est.mc_se = std::sqrt(var / replications);
    return est;
}

// ---------------------------------------------------------------------------
// Fully enumerable DGP: discrete X0 atoms, one binary time-varying covariate
// (the decision variable), tabulated treatment and outcome laws. Exact
// g-formula truths are computed by summation over the finite support.
// ---------------------------------------------------------------------------
struct EnumerableDgpConfig {
    int n = 1000;
    int n_atoms = 2;
    Vector atom_probs;  // n_atoms, sums to 1
    int n_treat1 = 2;
    int n_treat2 = 2;
    Matrix p_d1;  // n_atoms x n_treat1, rows sum to 1
    Matrix p_v1;  // n_atoms x n_treat1: P(V1 = 1 | atom, d1)
    std::vector<double> p_d2;    // [atom][v1][d1][d2], inner rows sum to 1
    std::vector<double> y_mean;  // [atom][v1][d1][d2]
    double y_noise_halfwidth = 0.0;  // uniform(-a, a) outcome noise
    int z0_groups = 0;               // z0 = atom % z0_groups
    std::uint64_t seed = 0;

    std::size_t table_size() const {
        return static_cast<std::size_t>(n_atoms) * 2 * static_cast<std::size_t>(n_treat1) *
               static_cast<std::size_t>(n_treat2);
    }
    std::size_t index(int atom, int v1, int d1, int d2) const {
        return ((static_cast<std::size_t>(atom) * 2 + static_cast<std::size_t>(v1)) *
                    static_cast<std::size_t>(n_treat1) +
                static_cast<std::size_t>(d1)) *
                   static_cast<std::size_t>(n_treat2) +
               static_cast<std::size_t>(d2);
    }
    double p_d2_at(int atom, int v1, int d1, int d2) const { return p_d2[index(atom, v1, d1, d2)]; }
    double y_mean_at(int atom, int v1, int d1, int d2) const { return y_mean[index(atom, v1, d1, d2)]; }

    void validate() const {
        if (n_atoms < 1 || n_atoms > 8) throw ConfigError("enumerable dgp: need 1..8 atoms");
        if (n_treat1 < 1 || n_treat1 > 3 || n_treat2 < 1 || n_treat2 > 3)
            throw ConfigError("enumerable dgp: treatment counts limited to 3");
        if (table_size() >= 100000) throw ConfigError("enumerable dgp: support too large");
        if (atom_probs.size() != n_atoms || std::abs(atom_probs.sum() - 1.0) > 1e-9)
            throw ConfigError("enumerable dgp: atom_probs must sum to 1");
        if (p_d1.rows() != n_atoms || p_d1.cols() != n_treat1)
            throw ConfigError("enumerable dgp: p_d1 shape");
        for (int a = 0; a < n_atoms; ++a)
            if (std::abs(p_d1.row(a).sum() - 1.0) > 1e-9)
                throw ConfigError("enumerable dgp: p_d1 rows must sum to 1");
        if (p_v1.rows() != n_atoms || p_v1.cols() != n_treat1)
            throw ConfigError("enumerable dgp: p_v1 shape");
        if (p_d2.size() != table_size() || y_mean.size() != table_size())
            throw ConfigError("enumerable dgp: table sizes disagree with the support");
        for (int a = 0; a < n_atoms; ++a)
            for (int v = 0; v <= 1; ++v)
                for (int d1 = 0; d1 < n_treat1; ++d1) {
                    double s = 0.0;
                    for (int d2 = 0; d2 < n_treat2; ++d2) s += p_d2_at(a, v, d1, d2);
                    if (std::abs(s - 1.0) > 1e-9)
                        throw ConfigError("enumerable dgp: p_d2 rows must sum to 1");
                }
    }
};

struct EnumerablePanel {
    PanelDataset panel;
    EnumerableDgpConfig cfg;
};

// X0 is emitted as one-hot atom indicators so that linear and logistic
// learners are saturated in the discrete covariate.
inline EnumerablePanel generate(const EnumerableDgpConfig& cfg) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, 0xE17));

    PanelDataset ds;
    const int n = cfg.n;
    ds.x0 = Matrix::Zero(n, cfg.n_atoms);
    ds.x1.resize(n, 1);
    ds.d1.resize(n);
    ds.d2.resize(n);
    ds.y.resize(n);

    auto pick = [&](auto prob_at, int count) {
        double u = rng.uniform();
        for (int c = 0; c < count; ++c) {
            u -= prob_at(c);
            if (u <= 0.0) return c;
        }
        return count - 1;
    };

    std::vector<int> atoms(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int atom = pick([&](int c) { return cfg.atom_probs(c); }, cfg.n_atoms);
        atoms[static_cast<std::size_t>(i)] = atom;
        ds.x0(i, atom) = 1.0;
        const int d1 = pick([&](int c) { return cfg.p_d1(atom, c); }, cfg.n_treat1);
        ds.d1(i) = d1;
        const int v1 = rng.bernoulli(cfg.p_v1(atom, d1)) ? 1 : 0;
        ds.x1(i, 0) = static_cast<double>(v1);
        const int d2 = pick([&](int c) { return cfg.p_d2_at(atom, v1, d1, c); }, cfg.n_treat2);
        ds.d2(i) = d2;
        double y = cfg.y_mean_at(atom, v1, d1, d2);
        if (cfg.y_noise_halfwidth > 0.0) y += cfg.y_noise_halfwidth * (2.0 * rng.uniform() - 1.0);
        ds.y(i) = y;
    }

    ds.n_treat1 = cfg.n_treat1;
    ds.n_treat2 = cfg.n_treat2;
    ds.y1_col = 0;
    for (int a = 0; a < cfg.n_atoms; ++a) ds.x0_names.push_back("x0=a" + std::to_string(a));
    ds.x1_names.push_back("v1");
    if (cfg.z0_groups > 1) {
        IntVector z(n);
        for (int i = 0; i < n; ++i) z(i) = atoms[static_cast<std::size_t>(i)] % cfg.z0_groups;
        ds.z0 = std::move(z);
    }
    ds.validate();
    return EnumerablePanel{std::move(ds), cfg};
}

namespace detail {

inline int atom_of(const PanelDataset& ds, int row) {
    int atom = 0;
    double best = ds.x0(row, 0);
    for (int j = 1; j < ds.p0(); ++j)
        if (ds.x0(row, j) > best) {
            best = ds.x0(row, j);
            atom = j;
        }
    return atom;
}

}  // namespace detail

// Exact APO via the g-formula summed over the finite support: the nu/mu
// nesting computed by brute force.
inline double oracle_apo_exact(const EnumerableDgpConfig& cfg, const Policy& pol) {
    cfg.validate();
    const int g1 = pol.d1_target;
    double apo = 0.0;
    for (int a = 0; a < cfg.n_atoms; ++a) {
        double nu = 0.0;
        for (int v = 0; v <= 1; ++v) {
            const int d2 = (v == 1 && pol.is_dynamic()) ? pol.d2_if_v1_one : pol.d2_if_v1_zero;
            const double pv = v == 1 ? cfg.p_v1(a, g1) : 1.0 - cfg.p_v1(a, g1);
            nu += pv * cfg.y_mean_at(a, v, g1, d2);
        }
        apo += cfg.atom_probs(a) * nu;
    }
    return apo;
}

inline OracleEstimate oracle_apo_mc(const EnumerableDgpConfig& cfg, const Policy& pol,
                                    int replications, std::uint64_t seed) {
    cfg.validate();
    if (replications < 1000) throw ConfigError("oracle_apo_mc: need at least 1000 replications");
    Rng rng(derive_seed(seed, 0x0AC1E));
    double sum = 0.0, sum_sq = 0.0;
    for (int r = 0; r < replications; ++r) {
        double u = rng.uniform();
        int atom = cfg.n_atoms - 1;
        for (int a = 0; a < cfg.n_atoms; ++a) {
            u -= cfg.atom_probs(a);
            if (u <= 0.0) {
                atom = a;
                break;
            }
        }
        const int d1 = pol.d1_target;
        const int v1 = rng.bernoulli(cfg.p_v1(atom, d1)) ? 1 : 0;
        const int d2 = (v1 == 1 && pol.is_dynamic()) ? pol.d2_if_v1_one : pol.d2_if_v1_zero;
        double y = cfg.y_mean_at(atom, v1, d1, d2);
        if (cfg.y_noise_halfwidth > 0.0) y += cfg.y_noise_halfwidth * (2.0 * rng.uniform() - 1.0);
        sum += y;
        sum_sq += y * y;
    }
    OracleEstimate est;
    est.truth = sum / replications;
    const double var = std::max(0.0, sum_sq / replications - est.truth * est.truth);
    est.mc_se = std::sqrt(var / replications);
    return est;
}

inline OracleNuisance oracle_nuisance(const EnumerableDgpConfig& cfg, const PanelDataset& ds,
                                      const Policy& pol) {
    const PolicyTargets targets = policy_targets(ds, pol);
    const int n = ds.n();
    OracleNuisance out;
    out.p1.resize(n);
    out.p2.resize(n);
    out.mu.resize(n);
    out.nu.resize(n);
    for (int i = 0; i < n; ++i) {
        const int atom = detail::atom_of(ds, i);
        const int v1 = static_cast<int>(ds.x1(i, 0));
        const int g1 = targets.g1(i);
        const int g2 = targets.g2(i);
        out.p1(i) = cfg.p_d1(atom, g1);
        out.p2(i) = cfg.p_d2_at(atom, v1, g1, g2);
        out.mu(i) = cfg.y_mean_at(atom, v1, g1, g2);
        double nu = 0.0;
        for (int v = 0; v <= 1; ++v) {
            const int d2v = (v == 1 && pol.is_dynamic()) ? pol.d2_if_v1_one : pol.d2_if_v1_zero;
            const double pv = v == 1 ? cfg.p_v1(atom, g1) : 1.0 - cfg.p_v1(atom, g1);
            nu += pv * cfg.y_mean_at(atom, v, g1, d2v);
        }
        out.nu(i) = nu;
    }
    return out;
}

}  // namespace seqdml

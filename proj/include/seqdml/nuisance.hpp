#pragma once

#include "seqdml/common.hpp"
#include "seqdml/folds.hpp"
#include "seqdml/learners.hpp"
#include "seqdml/panel.hpp"
#include "seqdml/policy.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace seqdml {

enum class NuisanceMethod { bhl22, bjz24, static_conf };

inline std::string to_string(NuisanceMethod m) {
    switch (m) {
        case NuisanceMethod::bhl22: return "bhl22";
        case NuisanceMethod::bjz24: return "bjz24";
        case NuisanceMethod::static_conf: return "static_conf";
    }
    return "?";
}

struct NuisanceOptions {
    int min_cell = 10;           // guard per treatment cell and fold
    bool bhl22_swap = false;     // also run the mirrored half split and average
    bool record_training = false;  // keep per-model row bookkeeping for audits
};

struct NuisanceLearners {
    LearnerSpec p1;
    LearnerSpec p2;
    LearnerSpec mu;
    LearnerSpec nu;

    static NuisanceLearners all(const LearnerSpec& prob_spec, const LearnerSpec& reg_spec) {
        NuisanceLearners l;
        l.p1 = prob_spec;
        l.p2 = prob_spec;
        l.mu = reg_spec;
        l.nu = reg_spec;
        return l;
    }
};

// Row bookkeeping per fitted model; the cross-fitting contract (no model
// contributes predictions for rows it was trained on) is asserted from this.
struct ModelRecord {
    std::string role;
    int fold = -1;
    std::vector<int> train_rows;
    std::vector<int> predict_rows;
};

// Cross-fitted nuisance predictions for one policy. Every unit's entries come
// from models trained on fold complements excluding that unit.
struct NuisanceEstimates {
    Vector p1_hat;  // P(D1 = g1 | X0)
    Vector p2_hat;  // P(D2 = g2 | X0, X1, D1 = g1); static_conf stores joint / p1
    Vector mu_hat;  // E[Y | X0, X1, D1 = g1, D2 = g2]
    Vector nu_hat;  // E[mu | X0, D1 = g1]; equals mu_hat for static_conf
    NuisanceMethod method = NuisanceMethod::bhl22;
    Policy policy;
    FoldPlan plan;
    std::vector<std::string> diagnostics;
    std::vector<ModelRecord> training_log;

    void check_finite() const {
        if (!p1_hat.allFinite() || !p2_hat.allFinite() || !mu_hat.allFinite() || !nu_hat.allFinite())
            throw NumericError("nuisance estimates contain non-finite values");
    }
};

namespace detail {

inline Matrix rows_of(const Matrix& m, const std::vector<int>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
    return out;
}

inline Vector gather(const Vector& v, const std::vector<int>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    return out;
}

inline IntVector gather(const IntVector& v, const std::vector<int>& idx) {
    IntVector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    return out;
}

struct NuisanceAudit {
    bool enabled = false;
    std::vector<ModelRecord>* log = nullptr;
    std::vector<std::string>* diagnostics = nullptr;

    void record(const std::string& role, int fold, const std::vector<int>& train,
                const std::vector<int>& predict) const {
        if (enabled && log) log->push_back(ModelRecord{role, fold, train, predict});
    }
    void note(const std::string& message) const {
        if (diagnostics) diagnostics->push_back(message);
    }
};

// Fits a multiclass probability model on a (possibly degenerate) training
// cell. A single-class cell falls back to a constant predictor; classes with
// rows present but below min_cell abort with a named error. Classes entirely
// absent are tolerated: the model emits a clipped column and the absence is
// noted in the diagnostics.
inline ProbModel fit_cell_classifier(const Matrix& features, const IntVector& labels, int n_classes,
                                     const LearnerSpec& spec, int min_cell, const std::string& role,
                                     int fold, const NuisanceAudit& audit,
                                     bool enforce_all_cells) {
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (Eigen::Index i = 0; i < labels.size(); ++i) ++counts[static_cast<std::size_t>(labels(i))];

    int present = 0;
    for (int c = 0; c < n_classes; ++c) {
        const int cnt = counts[static_cast<std::size_t>(c)];
        if (cnt > 0) ++present;
        const bool violated = enforce_all_cells ? cnt < min_cell : (cnt > 0 && cnt < min_cell);
        if (violated)
            throw EstimationError(role + ": treatment " + std::to_string(c) + " has " +
                                  std::to_string(cnt) + " training rows in fold " +
                                  std::to_string(fold) + ", below min_cell=" +
                                  std::to_string(min_cell));
    }
    if (present == 1) {
        int sole = 0;
        while (counts[static_cast<std::size_t>(sole)] == 0) ++sole;
        audit.note(role + ": fold " + std::to_string(fold) +
                   " training cell is single-class (treatment " + std::to_string(sole) +
                   "); constant probabilities emitted");
        return ProbModel(ConstantProbModel(n_classes, sole), spec.clip);
    }
    ProbModel model = fit_classifier(features, labels, n_classes, spec);
    for (int c : model.absent_classes())
        audit.note(role + ": fold " + std::to_string(fold) + " saw no rows of treatment " +
                   std::to_string(c) + "; clipped probability column emitted");
    return model;
}

inline Vector pick_class_probs(const Matrix& proba, const IntVector& wanted_class) {
    Vector out(proba.rows());
    for (Eigen::Index i = 0; i < proba.rows(); ++i) out(i) = proba(i, wanted_class(i));
    return out;
}

struct FoldContext {
    int k = 0;
    std::vector<int> test;
    std::vector<int> comp;
    std::vector<int> halves[2];  // complement split, per the fold plan
};

inline FoldContext fold_context(const FoldPlan& plan, int k) {
    FoldContext ctx;
    ctx.k = k;
    ctx.test = plan.fold_members(k);
    ctx.comp = plan.complement_members(k);
    for (int i : ctx.comp) ctx.halves[static_cast<std::size_t>(plan.half_of(i, k))].push_back(i);
    return ctx;
}

inline std::vector<int> filter(const std::vector<int>& base, const IntVector& flag) {
    std::vector<int> out;
    for (int i : base)
        if (flag(i) == 1) out.push_back(i);
    return out;
}

}  // namespace detail

// Step 4 of the cross-fitting loop: multiclass model of D1 on X0 per fold
// complement, evaluated at each test unit's first-period target.
inline Vector estimate_p1(const PanelDataset& ds, const Policy& pol, const FoldPlan& plan,
                          const LearnerSpec& spec, const NuisanceOptions& opts = {},
                          const detail::NuisanceAudit& audit = {}) {
    const PolicyTargets targets = policy_targets(ds, pol);
    Vector out(ds.n());
    for (int k = 0; k < plan.k_folds; ++k) {
        const auto ctx = detail::fold_context(plan, k);
        const ProbModel model = detail::fit_cell_classifier(
            detail::rows_of(ds.x0, ctx.comp), detail::gather(ds.d1, ctx.comp), ds.n_treat1,
            spec.with_seed(derive_seed(spec.seed, 1, static_cast<std::uint64_t>(k))), opts.min_cell,
            "p1", k, audit, /*enforce_all_cells=*/true);
        const Matrix proba = model.predict_proba(detail::rows_of(ds.x0, ctx.test));
        const Vector picked = detail::pick_class_probs(proba, detail::gather(targets.g1, ctx.test));
        for (std::size_t i = 0; i < ctx.test.size(); ++i)
            out(ctx.test[i]) = picked(static_cast<Eigen::Index>(i));
        audit.record("p1", k, ctx.comp, ctx.test);
    }
    return out;
}

// Step 5: multiclass model of D2 on (X0, X1), trained on the fold
// complement's g1-follower stratum (stratified, D1 is not a covariate), and
// evaluated at each unit's second-period target class.
inline Vector estimate_p2(const PanelDataset& ds, const Policy& pol, const FoldPlan& plan,
                          const LearnerSpec& spec, const NuisanceOptions& opts = {},
                          const detail::NuisanceAudit& audit = {}) {
    const PolicyTargets targets = policy_targets(ds, pol);
    const FollowIndicators follow = follow_indicators(ds, pol);
    const Matrix history = ds.full_history();
    Vector out(ds.n());
    for (int k = 0; k < plan.k_folds; ++k) {
        const auto ctx = detail::fold_context(plan, k);
        const std::vector<int> stratum = detail::filter(ctx.comp, follow.i1);
        if (stratum.empty())
            throw EstimationError("p2: no units with D1 = g1 in fold complement " + std::to_string(k) +
                                  " for policy '" + pol.name + "'");
        const ProbModel model = detail::fit_cell_classifier(
            detail::rows_of(history, stratum), detail::gather(ds.d2, stratum), ds.n_treat2,
            spec.with_seed(derive_seed(spec.seed, 2, static_cast<std::uint64_t>(k))), opts.min_cell,
            "p2", k, audit, /*enforce_all_cells=*/false);
        const Matrix proba = model.predict_proba(detail::rows_of(history, ctx.test));
        const Vector picked = detail::pick_class_probs(proba, detail::gather(targets.g2, ctx.test));
        for (std::size_t i = 0; i < ctx.test.size(); ++i)
            out(ctx.test[i]) = picked(static_cast<Eigen::Index>(i));
        audit.record("p2", k, stratum, ctx.test);
    }
    return out;
}

namespace detail {

inline std::vector<int> follower_cell(const std::vector<int>& base, const IntVector& i12,
                                      int min_cell, const std::string& role, int fold) {
    std::vector<int> cell = filter(base, i12);
    if (static_cast<int>(cell.size()) < min_cell)
        throw EstimationError(role + ": sequence-follower cell has " + std::to_string(cell.size()) +
                              " rows in fold " + std::to_string(fold) + ", below min_cell=" +
                              std::to_string(min_cell));
    return cell;
}

}  // namespace detail

// Step 6: regression of Y on (X0, X1) over sequence followers. The BHL22
// column trains on half 1 of the complement, the BJZ24 column on the full
// complement; `half1_only` selects between them.
inline Vector estimate_mu(const PanelDataset& ds, const Policy& pol, const FoldPlan& plan,
                          const LearnerSpec& spec, const NuisanceOptions& opts = {},
                          bool half1_only = false, const detail::NuisanceAudit& audit = {}) {
    const FollowIndicators follow = follow_indicators(ds, pol);
    const Matrix history = ds.full_history();
    Vector out(ds.n());
    for (int k = 0; k < plan.k_folds; ++k) {
        const auto ctx = detail::fold_context(plan, k);
        const std::vector<int>& base = half1_only ? ctx.halves[0] : ctx.comp;
        const std::vector<int> cell = detail::follower_cell(base, follow.i12, opts.min_cell, "mu", k);
        const RegressionModel model = fit_regressor(
            detail::rows_of(history, cell), detail::gather(ds.y, cell),
            spec.with_seed(derive_seed(spec.seed, 3, static_cast<std::uint64_t>(k))));
        const Vector pred = model.predict(detail::rows_of(history, ctx.test));
        for (std::size_t i = 0; i < ctx.test.size(); ++i)
            out(ctx.test[i]) = pred(static_cast<Eigen::Index>(i));
        audit.record("mu", k, cell, ctx.test);
    }
    return out;
}

// Doubly robust pseudo-outcome of the second period,
//   mu + 1{D2 = g2} (y - mu) / p2,
// regressed on X0 by the BJZ24 path. Exposed on its own so oracle inputs or
// deliberately corrupted nuisances can be pushed through it in tests.
inline Vector bjz24_pseudo_outcome(const Vector& mu, const Vector& p2, const Vector& y,
                                   const IntVector& i12) {
    if (mu.size() != p2.size() || mu.size() != y.size() || mu.size() != i12.size())
        throw ValidationError("bjz24_pseudo_outcome: input lengths differ");
    Vector out(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        if (p2(i) <= 0.0) throw NumericError("bjz24_pseudo_outcome: non-positive propensity");
        out(i) = mu(i) + (i12(i) == 1 ? (y(i) - mu(i)) / p2(i) : 0.0);
    }
    return out;
}

namespace detail {

struct MuNuPair {
    Vector mu_hat;
    Vector nu_hat;
};

// BHL22 nested-nuisance path (one orientation): train mu on the follower
// cell of one complement half, predict it on the other half's first-period
// followers, regress those predictions on X0, and evaluate both models on
// the held-out fold.
inline MuNuPair mu_nu_bhl22_oriented(const PanelDataset& ds, const Policy& pol, const FoldPlan& plan,
                                     const LearnerSpec& mu_spec, const LearnerSpec& nu_spec,
                                     const NuisanceOptions& opts, int mu_half,
                                     const NuisanceAudit& audit) {
    const FollowIndicators follow = follow_indicators(ds, pol);
    const Matrix history = ds.full_history();
    MuNuPair out;
    out.mu_hat.resize(ds.n());
    out.nu_hat.resize(ds.n());
    for (int k = 0; k < plan.k_folds; ++k) {
        const auto ctx = fold_context(plan, k);
        const std::vector<int>& train_half = ctx.halves[static_cast<std::size_t>(mu_half)];
        const std::vector<int>& other_half = ctx.halves[static_cast<std::size_t>(1 - mu_half)];

        const std::vector<int> mu_cell = follower_cell(train_half, follow.i12, opts.min_cell, "mu", k);
        const RegressionModel mu_model = fit_regressor(
            rows_of(history, mu_cell), gather(ds.y, mu_cell),
            mu_spec.with_seed(derive_seed(mu_spec.seed, 3, static_cast<std::uint64_t>(k),
                                          static_cast<std::uint64_t>(mu_half))));

        const std::vector<int> nu_cell = filter(other_half, follow.i1);
        if (static_cast<int>(nu_cell.size()) < opts.min_cell)
            throw EstimationError("nu (bhl22): half " + std::to_string(1 - mu_half) +
                                  " holds only " + std::to_string(nu_cell.size()) +
                                  " first-period followers in fold " + std::to_string(k));
        const Vector pseudo = mu_model.predict(rows_of(history, nu_cell));
        const RegressionModel nu_model = fit_regressor(
            rows_of(ds.x0, nu_cell), pseudo,
            nu_spec.with_seed(derive_seed(nu_spec.seed, 4, static_cast<std::uint64_t>(k),
                                          static_cast<std::uint64_t>(mu_half))));

        const Vector mu_pred = mu_model.predict(rows_of(history, ctx.test));
        const Vector nu_pred = nu_model.predict(rows_of(ds.x0, ctx.test));
        for (std::size_t i = 0; i < ctx.test.size(); ++i) {
            out.mu_hat(ctx.test[i]) = mu_pred(static_cast<Eigen::Index>(i));
            out.nu_hat(ctx.test[i]) = nu_pred(static_cast<Eigen::Index>(i));
        }
        audit.record("mu_half" + std::to_string(mu_half), k, mu_cell, ctx.test);
        audit.record("nu_half" + std::to_string(1 - mu_half), k, nu_cell, ctx.test);
    }
    return out;
}

inline MuNuPair mu_nu_bhl22(const PanelDataset& ds, const Policy& pol, const FoldPlan& plan,
                            const LearnerSpec& mu_spec, const LearnerSpec& nu_spec,
                            const NuisanceOptions& opts, const NuisanceAudit& audit) {
    MuNuPair first = mu_nu_bhl22_oriented(ds, pol, plan, mu_spec, nu_spec, opts, 0, audit);
    if (!opts.bhl22_swap) return first;
    // Optional swapped variant: mirror the half roles and average both
    // nuisances per unit.
    const MuNuPair second = mu_nu_bhl22_oriented(ds, pol, plan, mu_spec, nu_spec, opts, 1, audit);
    first.mu_hat = 0.5 * (first.mu_hat + second.mu_hat);
    first.nu_hat = 0.5 * (first.nu_hat + second.nu_hat);
    return first;
}

struct Bjz24Parts {
    Vector nu_first;   // predictions of the model built from half 1 inputs
    Vector nu_second;  // predictions of the model built from half 2 inputs
};

// BJZ24 nested-nuisance path: per complement half pair (a -> b), learn mu
// and p2 on half a's cells, build the doubly robust pseudo-outcome on half
// b's first-period followers, regress it on X0, and average the two
// resulting nu models on the held-out fold.
inline Vector nu_bjz24(const PanelDataset& ds, const Policy& pol, const FoldPlan& plan,
                       const LearnerSpec& mu_spec, const LearnerSpec& p2_spec,
                       const LearnerSpec& nu_spec, const NuisanceOptions& opts,
                       const NuisanceAudit& audit, Bjz24Parts* parts = nullptr) {
    const PolicyTargets targets = policy_targets(ds, pol);
    const FollowIndicators follow = follow_indicators(ds, pol);
    const Matrix history = ds.full_history();
    Vector out = Vector::Zero(ds.n());
    if (parts) {
        parts->nu_first = Vector::Zero(ds.n());
        parts->nu_second = Vector::Zero(ds.n());
    }

    for (int k = 0; k < plan.k_folds; ++k) {
        const auto ctx = fold_context(plan, k);
        for (int a = 0; a < 2; ++a) {
            const int b = 1 - a;
            const std::vector<int>& half_a = ctx.halves[static_cast<std::size_t>(a)];
            const std::vector<int>& half_b = ctx.halves[static_cast<std::size_t>(b)];

            const std::vector<int> mu_cell = follower_cell(half_a, follow.i12, opts.min_cell, "mu", k);
            const RegressionModel mu_model = fit_regressor(
                rows_of(history, mu_cell), gather(ds.y, mu_cell),
                mu_spec.with_seed(derive_seed(mu_spec.seed, 31, static_cast<std::uint64_t>(k),
                                              static_cast<std::uint64_t>(a))));

            const std::vector<int> p2_cell = filter(half_a, follow.i1);
            if (p2_cell.empty())
                throw EstimationError("nu (bjz24): half " + std::to_string(a) +
                                      " holds no first-period followers in fold " + std::to_string(k));
            const ProbModel p2_model = fit_cell_classifier(
                rows_of(history, p2_cell), gather(ds.d2, p2_cell), ds.n_treat2,
                p2_spec.with_seed(derive_seed(p2_spec.seed, 21, static_cast<std::uint64_t>(k),
                                              static_cast<std::uint64_t>(a))),
                /*min_cell=*/1, "p2 (bjz24 half)", k, audit, /*enforce_all_cells=*/false);

            const std::vector<int> nu_cell = filter(half_b, follow.i1);
            if (static_cast<int>(nu_cell.size()) < opts.min_cell)
                throw EstimationError("nu (bjz24): half " + std::to_string(b) + " holds only " +
                                      std::to_string(nu_cell.size()) +
                                      " first-period followers in fold " + std::to_string(k));

            const Vector mu_b = mu_model.predict(rows_of(history, nu_cell));
            const Matrix p2_b = p2_model.predict_proba(rows_of(history, nu_cell));
            Vector p2_picked(static_cast<Eigen::Index>(nu_cell.size()));
            Vector y_cell(static_cast<Eigen::Index>(nu_cell.size()));
            IntVector i12_cell(static_cast<Eigen::Index>(nu_cell.size()));
            for (std::size_t i = 0; i < nu_cell.size(); ++i) {
                const int unit = nu_cell[i];
                p2_picked(static_cast<Eigen::Index>(i)) =
                    p2_b(static_cast<Eigen::Index>(i), targets.g2(unit));
                y_cell(static_cast<Eigen::Index>(i)) = ds.y(unit);
                i12_cell(static_cast<Eigen::Index>(i)) = follow.i12(unit);
            }
            const Vector pseudo = bjz24_pseudo_outcome(mu_b, p2_picked, y_cell, i12_cell);
            const RegressionModel nu_model = fit_regressor(
                rows_of(ds.x0, nu_cell), pseudo,
                nu_spec.with_seed(derive_seed(nu_spec.seed, 41, static_cast<std::uint64_t>(k),
                                              static_cast<std::uint64_t>(a))));

            const Vector nu_pred = nu_model.predict(rows_of(ds.x0, ctx.test));
            for (std::size_t i = 0; i < ctx.test.size(); ++i) {
                out(ctx.test[i]) += 0.5 * nu_pred(static_cast<Eigen::Index>(i));
                if (parts)
                    (a == 0 ? parts->nu_first : parts->nu_second)(ctx.test[i]) =
                        nu_pred(static_cast<Eigen::Index>(i));
            }
            audit.record("nu_bjz24_half" + std::to_string(b), k, nu_cell, ctx.test);
        }
    }
    return out;
}

}  // namespace detail

// Eq. (8) path: regress half-2 predictions of mu on X0 over first-period
// followers. Returns the nested conditional outcome only; estimate_nuisances
// reuses the internal pair to avoid duplicate mu fits.
inline Vector estimate_nu_bhl22(const PanelDataset& ds, const Policy& pol, const FoldPlan& plan,
                                const LearnerSpec& mu_spec, const LearnerSpec& nu_spec,
                                const NuisanceOptions& opts = {},
                                const detail::NuisanceAudit& audit = {}) {
    return detail::mu_nu_bhl22(ds, pol, plan, mu_spec, nu_spec, opts, audit).nu_hat;
}

// Eq. (9) path with the additional bias-correction term and half swapping.
inline Vector estimate_nu_bjz24(const PanelDataset& ds, const Policy& pol, const FoldPlan& plan,
                                const LearnerSpec& mu_spec, const LearnerSpec& p2_spec,
                                const LearnerSpec& nu_spec, const NuisanceOptions& opts = {},
                                const detail::NuisanceAudit& audit = {},
                                detail::Bjz24Parts* parts = nullptr) {
    return detail::nu_bjz24(ds, pol, plan, mu_spec, p2_spec, nu_spec, opts, audit, parts);
}

// Static-confounding nuisances for a static sequence: one joint multiclass
// propensity over sequence labels plus a conditional outcome on X0. The
// joint propensity is factored as p1_hat * p2_hat with p2_hat = joint / p1,
// both factors clipped, so period-wise diagnostics and trimming stay
// available. nu_hat aliases mu_hat, making the static score a special case
// downstream.
inline NuisanceEstimates estimate_static_conf(const PanelDataset& ds, const Policy& pol,
                                              const FoldPlan& plan, const NuisanceLearners& learners,
                                              const NuisanceOptions& opts = {}) {
    if (pol.is_dynamic())
        throw ConfigError("static_conf requires a static policy, got '" + pol.name + "'");
    pol.validate(ds);
    const FollowIndicators follow = follow_indicators(ds, pol);

    NuisanceEstimates est;
    est.method = NuisanceMethod::static_conf;
    est.policy = pol;
    est.plan = plan;
    detail::NuisanceAudit audit{opts.record_training, &est.training_log, &est.diagnostics};

    const int n_seq = ds.n_treat1 * ds.n_treat2;
    IntVector seq_label(ds.n());
    for (int i = 0; i < ds.n(); ++i) seq_label(i) = ds.d1(i) * ds.n_treat2 + ds.d2(i);
    const int target_seq = pol.d1_target * ds.n_treat2 + pol.d2_if_v1_zero;

    est.p1_hat = estimate_p1(ds, pol, plan, learners.p1, opts, audit);
    est.p2_hat.resize(ds.n());
    est.mu_hat.resize(ds.n());

    const double clip = learners.p2.clip;
    for (int k = 0; k < plan.k_folds; ++k) {
        const auto ctx = detail::fold_context(plan, k);

        int target_rows = 0;
        for (int i : ctx.comp)
            if (seq_label(i) == target_seq) ++target_rows;
        if (target_rows < opts.min_cell)
            throw EstimationError("static_conf: sequence cell for policy '" + pol.name + "' has " +
                                  std::to_string(target_rows) + " rows in fold " + std::to_string(k) +
                                  ", below min_cell=" + std::to_string(opts.min_cell));

        const ProbModel joint_model = detail::fit_cell_classifier(
            detail::rows_of(ds.x0, ctx.comp), detail::gather(seq_label, ctx.comp), n_seq,
            learners.p2.with_seed(derive_seed(learners.p2.seed, 5, static_cast<std::uint64_t>(k))),
            /*min_cell=*/1, "joint sequence propensity", k, audit, /*enforce_all_cells=*/false);
        const Matrix joint_proba = joint_model.predict_proba(detail::rows_of(ds.x0, ctx.test));

        const std::vector<int> mu_cell =
            detail::follower_cell(ctx.comp, follow.i12, opts.min_cell, "mu (static)", k);
        const RegressionModel mu_model = fit_regressor(
            detail::rows_of(ds.x0, mu_cell), detail::gather(ds.y, mu_cell),
            learners.mu.with_seed(derive_seed(learners.mu.seed, 6, static_cast<std::uint64_t>(k))));
        const Vector mu_pred = mu_model.predict(detail::rows_of(ds.x0, ctx.test));

        for (std::size_t i = 0; i < ctx.test.size(); ++i) {
            const int unit = ctx.test[i];
            const double joint = joint_proba(static_cast<Eigen::Index>(i), target_seq);
            const double ratio = joint / est.p1_hat(unit);
            est.p2_hat(unit) = std::min(std::max(ratio, clip), 1.0 - clip);
            est.mu_hat(unit) = mu_pred(static_cast<Eigen::Index>(i));
        }
        audit.record("joint", k, ctx.comp, ctx.test);
        audit.record("mu_static", k, mu_cell, ctx.test);
    }
    est.nu_hat = est.mu_hat;
    est.check_finite();
    return est;
}

// Full cross-fitted nuisance pipeline for one policy (Algorithm C.1 steps
// 2-10, one column per method).
inline NuisanceEstimates estimate_nuisances(const PanelDataset& ds, const Policy& pol,
                                            const FoldPlan& plan, const NuisanceLearners& learners,
                                            NuisanceMethod method, const NuisanceOptions& opts = {}) {
    if (plan.n() != ds.n()) throw ConfigError("fold plan and dataset disagree on N");
    if (method == NuisanceMethod::static_conf) return estimate_static_conf(ds, pol, plan, learners, opts);

    pol.validate(ds);
    NuisanceEstimates est;
    est.method = method;
    est.policy = pol;
    est.plan = plan;
    detail::NuisanceAudit audit{opts.record_training, &est.training_log, &est.diagnostics};

    est.p1_hat = estimate_p1(ds, pol, plan, learners.p1, opts, audit);
    est.p2_hat = estimate_p2(ds, pol, plan, learners.p2, opts, audit);
    if (method == NuisanceMethod::bhl22) {
        const detail::MuNuPair pair =
            detail::mu_nu_bhl22(ds, pol, plan, learners.mu, learners.nu, opts, audit);
        est.mu_hat = pair.mu_hat;
        est.nu_hat = pair.nu_hat;
    } else {
        est.mu_hat = estimate_mu(ds, pol, plan, learners.mu, opts, /*half1_only=*/false, audit);
        est.nu_hat = detail::nu_bjz24(ds, pol, plan, learners.mu, learners.p2, learners.nu, opts, audit);
    }
    est.check_finite();
    return est;
}

// Columnar audit dump (unit id, fold, p1, p2, mu, nu).
inline void dump_nuisances_csv(const NuisanceEstimates& est, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << "unit,fold,p1_hat,p2_hat,mu_hat,nu_hat\n";
    char buf[40];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (int i = 0; i < est.p1_hat.size(); ++i)
        out << i << ',' << est.plan.fold_id[static_cast<std::size_t>(i)] << ',' << fmt(est.p1_hat(i))
            << ',' << fmt(est.p2_hat(i)) << ',' << fmt(est.mu_hat(i)) << ',' << fmt(est.nu_hat(i))
            << '\n';
}

}  // namespace seqdml

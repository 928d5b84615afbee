// Canonical synthetic configurations shared by the unit and acceptance
// suites.
#pragma once

#include "seqdml/simulator.hpp"

namespace seqdml::testdgp {

// Enumerable config whose treatment and outcome laws are logit/linear
// additive in (atom indicators, v1), so saturated ridge and logistic
// learners estimate every nuisance consistently.
inline EnumerableDgpConfig enumerable_additive(int n, std::uint64_t seed) {
    EnumerableDgpConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    cfg.n_atoms = 4;
    cfg.atom_probs = Vector(4);
    cfg.atom_probs << 0.4, 0.3, 0.2, 0.1;
    cfg.n_treat1 = 2;
    cfg.n_treat2 = 2;

    cfg.p_d1 = Matrix(4, 2);
    const double share_d1[4] = {0.35, 0.50, 0.65, 0.45};
    for (int a = 0; a < 4; ++a) {
        cfg.p_d1(a, 1) = share_d1[a];
        cfg.p_d1(a, 0) = 1.0 - share_d1[a];
    }

    cfg.p_v1 = Matrix(4, 2);
    for (int a = 0; a < 4; ++a)
        for (int d1 = 0; d1 < 2; ++d1) cfg.p_v1(a, d1) = sigmoid(-0.5 + 0.3 * a + 0.6 * d1);

    cfg.p_d2.assign(cfg.table_size(), 0.0);
    cfg.y_mean.assign(cfg.table_size(), 0.0);
    const double atom_shift[4] = {-0.4, -0.1, 0.2, 0.5};
    const double d1_shift[2] = {0.1, -0.2};
    const double f_atom[4] = {0.0, 0.8, 1.6, 2.4};
    const double h_seq[2][2] = {{0.5, 1.5}, {2.0, 0.7}};
    const double j_d2[2] = {0.0, 0.9};
    for (int a = 0; a < 4; ++a)
        for (int v = 0; v <= 1; ++v)
            for (int d1 = 0; d1 < 2; ++d1) {
                const double p1 = sigmoid(d1_shift[d1] + atom_shift[a] + 0.7 * v);
                cfg.p_d2[cfg.index(a, v, d1, 1)] = p1;
                cfg.p_d2[cfg.index(a, v, d1, 0)] = 1.0 - p1;
                for (int d2 = 0; d2 < 2; ++d2)
                    cfg.y_mean[cfg.index(a, v, d1, d2)] =
                        f_atom[a] + 1.2 * v + h_seq[d1][d2] + j_d2[d2] * v;
            }
    cfg.y_noise_halfwidth = 1.5;
    cfg.z0_groups = 2;
    return cfg;
}

// Linear-Gaussian config with all three feedback pathways active; the
// workhorse for bias and orthogonality experiments.
inline DgpConfig confounded_linear(int n, std::uint64_t seed) {
    DgpConfig cfg = DgpConfig::zeroed(n, /*p0=*/2, /*n_treat1=*/2, /*n_treat2=*/2, /*p1_cont=*/1);
    cfg.seed = seed;

    cfg.d1_x0_coef(1, 0) = 0.4;
    cfg.d1_x0_coef(1, 1) = -0.3;

    cfg.x1_x0_coef(0, 0) = 0.8;
    cfg.x1_d1_shift(0, 1) = 1.0;
    cfg.x1_noise_sd = 1.0;

    cfg.v1_intercept = -0.3;
    cfg.v1_x0_coef(1) = 0.6;
    cfg.v1_d1_shift(1) = 1.2;

    cfg.d2_x0_coef(1, 0) = 0.3;
    cfg.d2_x1_coef(1, 0) = 0.5;   // continuous x1 column
    cfg.d2_x1_coef(1, 1) = 0.9;   // v1 column
    cfg.d2_d1_shift(1, 1) = -0.2;

    cfg.y_intercept = 1.0;
    cfg.y_x0_coef << 0.5, 0.5;
    cfg.y_x1_coef << 0.8, 0.7;
    cfg.y_d1_effect(1) = 0.3;
    cfg.y_d2_effect(1) = 0.6;
    cfg.y_d1d2_effect(1, 1) = 0.2;
    cfg.y_v1_d2_effect(1) = 0.5;
    cfg.y_noise_sd = 1.0;

    cfg.z0_groups = 2;
    return cfg;
}

}  // namespace seqdml::testdgp

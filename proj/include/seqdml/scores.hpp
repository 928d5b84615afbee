#pragma once

#include "seqdml/common.hpp"
#include "seqdml/nuisance.hpp"
#include "seqdml/panel.hpp"
#include "seqdml/policy.hpp"

#include <cstdio>
#include <fstream>
#include <string>

namespace seqdml {

// Per-unit realized score for one policy; every estimand downstream is an
// aggregate of one of these arrays. `orthogonal` is false for the IPW
// baseline, which blocks its standard errors from being reported as if they
// carried the DML guarantees.
struct ScoreVector {
    Vector theta;
    Policy policy;
    std::string method;
    bool orthogonal = true;
    IntVector i1;
    IntVector i12;
    std::vector<std::string> diagnostics;

    void check_finite() const {
        if (!theta.allFinite()) throw NumericError("score vector contains non-finite entries");
    }
};

// Sequential AIPW score under dynamic confounding:
//   theta = nu + i1 (mu - nu) / p1 + i12 (y - mu) / (p2 p1).
inline ScoreVector dynamic_score(const PanelDataset& ds, const Policy& pol,
                                 const NuisanceEstimates& nuis) {
    if (nuis.method == NuisanceMethod::static_conf)
        throw ConfigError("dynamic_score expects bhl22 or bjz24 nuisances");
    const FollowIndicators follow = follow_indicators(ds, pol);
    ScoreVector score;
    score.policy = pol;
    score.method = to_string(nuis.method);
    score.i1 = follow.i1;
    score.i12 = follow.i12;
    score.theta.resize(ds.n());
    for (int i = 0; i < ds.n(); ++i) {
        const double p1 = nuis.p1_hat(i);
        const double p2 = nuis.p2_hat(i);
        if (p1 <= 0.0 || p2 <= 0.0) throw NumericError("propensity at or below zero after clipping");
        double theta = nuis.nu_hat(i);
        if (follow.i1(i) == 1) theta += (nuis.mu_hat(i) - nuis.nu_hat(i)) / p1;
        if (follow.i12(i) == 1) theta += (ds.y(i) - nuis.mu_hat(i)) / (p2 * p1);
        score.theta(i) = theta;
    }
    score.check_finite();
    return score;
}

// AIPW score under static confounding; the joint sequence propensity is the
// product of the stored factors.
inline ScoreVector static_score(const PanelDataset& ds, const Policy& pol,
                                const NuisanceEstimates& nuis) {
    if (nuis.method != NuisanceMethod::static_conf)
        throw ConfigError("static_score expects static_conf nuisances");
    const FollowIndicators follow = follow_indicators(ds, pol);
    ScoreVector score;
    score.policy = pol;
    score.method = to_string(nuis.method);
    score.i1 = follow.i1;
    score.i12 = follow.i12;
    score.theta.resize(ds.n());
    for (int i = 0; i < ds.n(); ++i) {
        const double joint = nuis.p1_hat(i) * nuis.p2_hat(i);
        if (joint <= 0.0) throw NumericError("joint propensity at or below zero after clipping");
        double theta = nuis.mu_hat(i);
        if (follow.i12(i) == 1) theta += (ds.y(i) - nuis.mu_hat(i)) / joint;
        score.theta(i) = theta;
    }
    score.check_finite();
    return score;
}

// Inverse probability weighting baseline. Not Neyman orthogonal; kept for
// comparisons only.
inline ScoreVector ipw_score(const PanelDataset& ds, const Policy& pol,
                             const NuisanceEstimates& nuis) {
    const FollowIndicators follow = follow_indicators(ds, pol);
    ScoreVector score;
    score.policy = pol;
    score.method = "ipw";
    score.orthogonal = false;
    score.i1 = follow.i1;
    score.i12 = follow.i12;
    score.theta.resize(ds.n());
    int extreme = 0;
    double min_p = 1.0;
    for (int i = 0; i < ds.n(); ++i) {
        const double denom = nuis.p2_hat(i) * nuis.p1_hat(i);
        if (denom <= 0.0) throw NumericError("propensity product at or below zero after clipping");
        score.theta(i) = follow.i12(i) == 1 ? ds.y(i) / denom : 0.0;
        if (follow.i12(i) == 1 && denom < 1e-4) {
            ++extreme;
            min_p = std::min(min_p, denom);
        }
    }
    if (extreme > 0)
        score.diagnostics.push_back("ipw: " + std::to_string(extreme) +
                                    " follower(s) carry propensity products below 1e-4 (min " +
                                    std::to_string(min_p) + "); weights are unstable");
    score.check_finite();
    return score;
}

// Plug-in g-formula APO: mean of the nested conditional outcome. No
// de-biasing and no standard error claim.
inline double gcomp_estimate(const PanelDataset& ds, const Policy& pol,
                             const NuisanceEstimates& nuis) {
    (void)ds;
    (void)pol;
    if (nuis.nu_hat.size() == 0) throw ConfigError("gcomp_estimate: nu_hat is empty");
    return nuis.nu_hat.mean();
}

// Audit dump (unit id, theta, i1, i12).
inline void dump_scores_csv(const ScoreVector& score, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << "unit,theta,i1,i12\n";
    char buf[40];
    for (int i = 0; i < score.theta.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", score.theta(i));
        out << i << ',' << buf << ',' << score.i1(i) << ',' << score.i12(i) << '\n';
    }
}

}  // namespace seqdml

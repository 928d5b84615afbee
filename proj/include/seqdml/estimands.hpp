#pragma once

#include "seqdml/common.hpp"
#include "seqdml/scores.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace seqdml {

// 97.5% normal quantile pinning the 95% confidence intervals.
inline constexpr double kZ95 = 1.959964;

enum class EstimandKind { apo, gapo, ate, gate, gate_minus_ate };

inline std::string to_string(EstimandKind k) {
    switch (k) {
        case EstimandKind::apo: return "apo";
        case EstimandKind::gapo: return "gapo";
        case EstimandKind::ate: return "ate";
        case EstimandKind::gate: return "gate";
        case EstimandKind::gate_minus_ate: return "gate_minus_ate";
    }
    return "?";
}

struct EffectReport {
    EstimandKind kind = EstimandKind::apo;
    std::string policy_a;
    std::string policy_b;          // empty unless the estimand compares two policies
    std::optional<int> group;      // z0 level for group estimands
    double estimate = 0.0;
    double se = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n_effective = 0;
    bool baseline_flag = false;  // standard errors carry no orthogonality guarantee
};

namespace detail {

// Mean and influence-function standard error: sigma is the root mean squared
// deviation (denominator N) and the SE divides by sqrt(N) on top.
inline void mean_and_se(const Vector& values, double& mean, double& se) {
    const auto n = static_cast<double>(values.size());
    mean = values.mean();
    const double sigma_sq = (values.array() - mean).square().sum() / n;
    se = std::sqrt(sigma_sq / n);
}

inline void finish_inference(EffectReport& report) {
    if (report.se > 0.0) {
        report.t_stat = report.estimate / report.se;
        report.p_value = normal_two_sided_p(report.t_stat);
    } else {
        report.t_stat = report.estimate == 0.0 ? 0.0
                                               : std::copysign(std::numeric_limits<double>::infinity(),
                                                               report.estimate);
        report.p_value = report.estimate == 0.0 ? 1.0 : 0.0;
    }
    report.ci_low = report.estimate - kZ95 * report.se;
    report.ci_high = report.estimate + kZ95 * report.se;
}

inline std::vector<int> group_members(const IntVector& z0, int group) {
    std::vector<int> idx;
    for (int i = 0; i < z0.size(); ++i)
        if (z0(i) == group) idx.push_back(i);
    return idx;
}

}  // namespace detail

// Average potential outcome from one score array.
inline EffectReport apo(const ScoreVector& scores) {
    if (scores.theta.size() == 0) throw ValidationError("apo: empty score vector");
    EffectReport report;
    report.kind = EstimandKind::apo;
    report.policy_a = scores.policy.name;
    report.baseline_flag = !scores.orthogonal;
    report.n_effective = static_cast<int>(scores.theta.size());
    detail::mean_and_se(scores.theta, report.estimate, report.se);
    detail::finish_inference(report);
    return report;
}

// Group average potential outcome.
inline EffectReport gapo(const ScoreVector& scores, const IntVector& z0, int group) {
    if (scores.theta.size() != z0.size()) throw ValidationError("gapo: score and group lengths differ");
    const std::vector<int> idx = detail::group_members(z0, group);
    if (idx.empty()) throw ValidationError("gapo: group " + std::to_string(group) + " is empty");
    Vector sub(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) sub(static_cast<Eigen::Index>(i)) = scores.theta(idx[i]);
    EffectReport report;
    report.kind = EstimandKind::gapo;
    report.policy_a = scores.policy.name;
    report.group = group;
    report.baseline_flag = !scores.orthogonal;
    report.n_effective = static_cast<int>(idx.size());
    detail::mean_and_se(sub, report.estimate, report.se);
    detail::finish_inference(report);
    return report;
}

// Average treatment effect between two policies, computed from paired
// per-unit score differences over one common retained sample.
inline EffectReport ate(const ScoreVector& scores_a, const ScoreVector& scores_b) {
    if (scores_a.theta.size() != scores_b.theta.size())
        throw ValidationError("ate: score vectors differ in length");
    if (scores_a.theta.size() == 0) throw ValidationError("ate: empty score vectors");
    EffectReport report;
    report.kind = EstimandKind::ate;
    report.policy_a = scores_a.policy.name;
    report.policy_b = scores_b.policy.name;
    report.baseline_flag = !scores_a.orthogonal || !scores_b.orthogonal;
    report.n_effective = static_cast<int>(scores_a.theta.size());
    const Vector diff = scores_a.theta - scores_b.theta;
    detail::mean_and_se(diff, report.estimate, report.se);
    detail::finish_inference(report);
    return report;
}

// Group average treatment effect: the paired difference restricted to one
// pre-treatment group, with N_group denominators throughout.
inline EffectReport gate(const ScoreVector& scores_a, const ScoreVector& scores_b, const IntVector& z0,
                         int group) {
    if (scores_a.theta.size() != scores_b.theta.size() || scores_a.theta.size() != z0.size())
        throw ValidationError("gate: input lengths differ");
    const std::vector<int> idx = detail::group_members(z0, group);
    if (idx.empty()) throw ValidationError("gate: group " + std::to_string(group) + " is empty");
    Vector diff(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        diff(static_cast<Eigen::Index>(i)) = scores_a.theta(idx[i]) - scores_b.theta(idx[i]);
    EffectReport report;
    report.kind = EstimandKind::gate;
    report.policy_a = scores_a.policy.name;
    report.policy_b = scores_b.policy.name;
    report.group = group;
    report.baseline_flag = !scores_a.orthogonal || !scores_b.orthogonal;
    report.n_effective = static_cast<int>(idx.size());
    detail::mean_and_se(diff, report.estimate, report.se);
    detail::finish_inference(report);
    return report;
}

// GATE minus ATE with the covariance-adjusted variance
//   Var(GATE_k - ATE) = Var(GATE_k) + Var(ATE) - 2 (N_k / N) Var(GATE_k),
// which collapses to zero when the group covers the whole sample.
inline EffectReport gate_minus_ate(const ScoreVector& scores_a, const ScoreVector& scores_b,
                                   const IntVector& z0, int group) {
    const EffectReport gate_report = gate(scores_a, scores_b, z0, group);
    const EffectReport ate_report = ate(scores_a, scores_b);
    EffectReport report;
    report.kind = EstimandKind::gate_minus_ate;
    report.policy_a = scores_a.policy.name;
    report.policy_b = scores_b.policy.name;
    report.group = group;
    report.baseline_flag = gate_report.baseline_flag;
    report.n_effective = gate_report.n_effective;
    report.estimate = gate_report.estimate - ate_report.estimate;
    const double share = static_cast<double>(gate_report.n_effective) / ate_report.n_effective;
    const double var_gate = gate_report.se * gate_report.se;
    const double var_ate = ate_report.se * ate_report.se;
    const double variance = std::max(0.0, var_gate + var_ate - 2.0 * share * var_gate);
    report.se = std::sqrt(variance);
    detail::finish_inference(report);
    return report;
}

// Significance stars at the 10/5/1% levels.
inline std::string significance_stars(double p_value) {
    if (p_value < 0.01) return "***";
    if (p_value < 0.05) return "**";
    if (p_value < 0.10) return "*";
    return "";
}

}  // namespace seqdml

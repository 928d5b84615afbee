#pragma once

#include "seqdml/common.hpp"
#include "seqdml/nuisance.hpp"
#include "seqdml/panel.hpp"
#include "seqdml/policy.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <string>
#include <vector>

namespace seqdml {

struct TrimResult {
    double low = 0.0;
    double high = 1.0;
    std::vector<std::uint8_t> keep;  // length N; outside-branch units stay 1
    bool skipped = false;
};

// Minmax rule on first-period propensities: lower threshold is the larger of
// the two group minima, upper threshold the smaller of the two group maxima.
// One pass, no fixed-point iteration.
inline TrimResult minmax_trim_period1(const Vector& p1_hat, const IntVector& i1) {
    if (p1_hat.size() != i1.size()) throw ValidationError("trim: propensity and indicator lengths differ");
    double min_f = std::numeric_limits<double>::infinity(), max_f = -min_f;
    double min_r = min_f, max_r = -min_f;
    int n_f = 0, n_r = 0;
    for (int i = 0; i < p1_hat.size(); ++i) {
        if (i1(i) == 1) {
            ++n_f;
            min_f = std::min(min_f, p1_hat(i));
            max_f = std::max(max_f, p1_hat(i));
        } else {
            ++n_r;
            min_r = std::min(min_r, p1_hat(i));
            max_r = std::max(max_r, p1_hat(i));
        }
    }
    if (n_f == 0 || n_r == 0)
        throw EstimationError("trim: one-sided follower split (followers=" + std::to_string(n_f) +
                              ", rest=" + std::to_string(n_r) + "); overlap violated upstream");
    TrimResult r;
    r.low = std::max(min_f, min_r);
    r.high = std::min(max_f, max_r);
    r.keep.assign(static_cast<std::size_t>(p1_hat.size()), 1);
    for (int i = 0; i < p1_hat.size(); ++i)
        if (p1_hat(i) < r.low || p1_hat(i) > r.high) r.keep[static_cast<std::size_t>(i)] = 0;
    return r;
}

// Second-period minmax rule within one policy branch: sequence followers
// (i12 = 1) against everyone else in the branch. A branch whose complement
// is empty is skipped (kept whole); a branch without followers is an error.
inline TrimResult minmax_trim_period2(const Vector& p2_hat, const IntVector& i12,
                                      const std::vector<std::uint8_t>& branch_mask) {
    if (p2_hat.size() != i12.size() ||
        branch_mask.size() != static_cast<std::size_t>(p2_hat.size()))
        throw ValidationError("trim: input lengths differ");
    double min_f = std::numeric_limits<double>::infinity(), max_f = -min_f;
    double min_r = min_f, max_r = -min_f;
    int n_f = 0, n_r = 0;
    for (int i = 0; i < p2_hat.size(); ++i) {
        if (branch_mask[static_cast<std::size_t>(i)] == 0) continue;
        if (i12(i) == 1) {
            ++n_f;
            min_f = std::min(min_f, p2_hat(i));
            max_f = std::max(max_f, p2_hat(i));
        } else {
            ++n_r;
            min_r = std::min(min_r, p2_hat(i));
            max_r = std::max(max_r, p2_hat(i));
        }
    }
    TrimResult r;
    r.keep.assign(static_cast<std::size_t>(p2_hat.size()), 1);
    if (n_f == 0)
        throw EstimationError("trim: branch holds no sequence followers");
    if (n_r == 0) {
        r.skipped = true;
        return r;
    }
    r.low = std::max(min_f, min_r);
    r.high = std::min(max_f, max_r);
    for (int i = 0; i < p2_hat.size(); ++i) {
        if (branch_mask[static_cast<std::size_t>(i)] == 0) continue;
        if (p2_hat(i) < r.low || p2_hat(i) > r.high) r.keep[static_cast<std::size_t>(i)] = 0;
    }
    return r;
}

// Scale-free mean gap in percent. Sample variances; a zero pooled variance
// yields 0 for equal means and +infinity otherwise.
inline double standardized_difference(const Vector& sample_a, const Vector& sample_b) {
    if (sample_a.size() == 0 || sample_b.size() == 0)
        throw ValidationError("standardized_difference: empty sample");
    auto moments = [](const Vector& v) {
        const double mean = v.mean();
        double var = 0.0;
        if (v.size() > 1) var = (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
        return std::pair<double, double>{mean, var};
    };
    const auto [mean_a, var_a] = moments(sample_a);
    const auto [mean_b, var_b] = moments(sample_b);
    const double pooled = 0.5 * (var_a + var_b);
    const double gap = std::abs(mean_a - mean_b);
    if (pooled == 0.0) return gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return gap / std::sqrt(pooled) * 100.0;
}

// Imbalance threshold on standardized differences.
inline bool imbalance_flag(double delta) { return delta >= 20.0; }

struct BalanceRow {
    std::string variable;
    double mean_kept = 0.0;
    double mean_dropped = 0.0;
    double delta = 0.0;
    bool imbalanced = false;
};

struct PolicyTrimDetail {
    std::string policy;
    double p1_low = 0.0, p1_high = 1.0;
    struct Branch {
        int d2 = 0;
        double low = 0.0, high = 1.0;
        bool skipped = false;
    };
    std::vector<Branch> period2;
    int drop_count = 0;  // units this policy alone would drop
};

struct TrimReport {
    std::vector<std::uint8_t> keep_mask;
    std::vector<PolicyTrimDetail> policies;
    int drop_count = 0;
    double drop_share = 0.0;
    std::vector<BalanceRow> balance;
    std::vector<std::string> warnings;
    // Resolution of the ambiguous grouping in the second-period rule: the
    // complement is everyone in the branch who is not a full sequence
    // follower, not just D1-followers.
    std::string period2_grouping = "followers(i12=1) vs all other units within each branch";
};

// Per-policy masks joined by conjunction across all policies, with drop
// attribution and a kept-vs-dropped balance table over the X0 columns.
inline TrimReport union_trim(const PanelDataset& ds, const std::vector<Policy>& policies,
                             const std::vector<NuisanceEstimates>& all_nuisances) {
    if (policies.size() != all_nuisances.size())
        throw ConfigError("union_trim: one NuisanceEstimates per policy required");
    if (policies.empty()) throw ConfigError("union_trim: no policies given");

    TrimReport report;
    report.keep_mask.assign(static_cast<std::size_t>(ds.n()), 1);

    for (std::size_t p = 0; p < policies.size(); ++p) {
        const Policy& pol = policies[p];
        const NuisanceEstimates& nuis = all_nuisances[p];
        const FollowIndicators follow = follow_indicators(ds, pol);
        const PolicyTargets targets = policy_targets(ds, pol);

        PolicyTrimDetail detail;
        detail.policy = pol.name;

        const TrimResult r1 = minmax_trim_period1(nuis.p1_hat, follow.i1);
        detail.p1_low = r1.low;
        detail.p1_high = r1.high;

        std::vector<std::uint8_t> policy_keep = r1.keep;

        std::vector<int> branch_values{pol.d2_if_v1_zero};
        if (pol.is_dynamic() && pol.d2_if_v1_one != pol.d2_if_v1_zero)
            branch_values.push_back(pol.d2_if_v1_one);
        for (int branch_d2 : branch_values) {
            std::vector<std::uint8_t> branch_mask(static_cast<std::size_t>(ds.n()), 0);
            int members = 0;
            for (int i = 0; i < ds.n(); ++i)
                if (targets.g2(i) == branch_d2) {
                    branch_mask[static_cast<std::size_t>(i)] = 1;
                    ++members;
                }
            PolicyTrimDetail::Branch branch;
            branch.d2 = branch_d2;
            if (members == 0) {
                branch.skipped = true;
                report.warnings.push_back("policy '" + pol.name + "': branch d2=" +
                                          std::to_string(branch_d2) + " has no units; skipped");
                detail.period2.push_back(branch);
                continue;
            }
            const TrimResult r2 = minmax_trim_period2(nuis.p2_hat, follow.i12, branch_mask);
            branch.low = r2.low;
            branch.high = r2.high;
            branch.skipped = r2.skipped;
            if (r2.skipped)
                report.warnings.push_back("policy '" + pol.name + "': branch d2=" +
                                          std::to_string(branch_d2) +
                                          " has no non-followers; branch skipped");
            detail.period2.push_back(branch);
            for (int i = 0; i < ds.n(); ++i)
                policy_keep[static_cast<std::size_t>(i)] &= r2.keep[static_cast<std::size_t>(i)];
        }

        for (int i = 0; i < ds.n(); ++i) {
            if (policy_keep[static_cast<std::size_t>(i)] == 0) ++detail.drop_count;
            report.keep_mask[static_cast<std::size_t>(i)] &= policy_keep[static_cast<std::size_t>(i)];
        }
        report.policies.push_back(std::move(detail));
    }

    for (std::uint8_t kept : report.keep_mask)
        if (kept == 0) ++report.drop_count;
    report.drop_share = static_cast<double>(report.drop_count) / ds.n();
    if (report.drop_count == ds.n()) throw EstimationError("union_trim: trimming removed every unit");

    if (report.drop_count > 0) {
        for (int j = 0; j < ds.p0(); ++j) {
            std::vector<double> kept, dropped;
            for (int i = 0; i < ds.n(); ++i)
                (report.keep_mask[static_cast<std::size_t>(i)] == 1 ? kept : dropped)
                    .push_back(ds.x0(i, j));
            BalanceRow row;
            row.variable = j < static_cast<int>(ds.x0_names.size())
                               ? ds.x0_names[static_cast<std::size_t>(j)]
                               : "x0_" + std::to_string(j);
            row.mean_kept =
                Eigen::Map<const Vector>(kept.data(), static_cast<Eigen::Index>(kept.size())).mean();
            row.mean_dropped =
                Eigen::Map<const Vector>(dropped.data(), static_cast<Eigen::Index>(dropped.size()))
                    .mean();
            row.delta = standardized_difference(
                Eigen::Map<const Vector>(kept.data(), static_cast<Eigen::Index>(kept.size())),
                Eigen::Map<const Vector>(dropped.data(), static_cast<Eigen::Index>(dropped.size())));
            row.imbalanced = imbalance_flag(row.delta);
            report.balance.push_back(std::move(row));
        }
    }
    return report;
}

// Fixed-bin overlap diagnostics for one propensity array split by a follow
// indicator, plus a small percentile table for plotting.
struct OverlapSummary {
    static constexpr int kBins = 50;
    std::array<double, kBins> followers_hist{};
    std::array<double, kBins> rest_hist{};
    static constexpr std::array<int, 7> kPercentiles{1, 5, 25, 50, 75, 95, 99};
    std::array<double, 7> followers_pct{};
    std::array<double, 7> rest_pct{};
};

namespace detail {

inline double percentile(std::vector<double> sorted, double pct) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = pct / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

inline OverlapSummary overlap_summary(const Vector& p_hat, const IntVector& follow_indicator) {
    if (p_hat.size() == 0 || p_hat.size() != follow_indicator.size())
        throw ValidationError("overlap_summary: bad input lengths");
    OverlapSummary s;
    std::vector<double> followers, rest;
    for (int i = 0; i < p_hat.size(); ++i)
        (follow_indicator(i) == 1 ? followers : rest).push_back(p_hat(i));

    auto fill = [](const std::vector<double>& values, std::array<double, OverlapSummary::kBins>& hist,
                   std::array<double, 7>& pct) {
        if (values.empty()) {
            pct.fill(std::numeric_limits<double>::quiet_NaN());
            return;
        }
        for (double v : values) {
            int bin = static_cast<int>(v * OverlapSummary::kBins);
            bin = std::min(std::max(bin, 0), OverlapSummary::kBins - 1);
            hist[static_cast<std::size_t>(bin)] += 1.0;
        }
        for (auto& h : hist) h /= static_cast<double>(values.size());
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t q = 0; q < OverlapSummary::kPercentiles.size(); ++q)
            pct[q] = detail::percentile(sorted, OverlapSummary::kPercentiles[q]);
    };
    fill(followers, s.followers_hist, s.followers_pct);
    fill(rest, s.rest_hist, s.rest_pct);
    return s;
}

}  // namespace seqdml

#include "seqdml/trimming.hpp"

#include "dgps.hpp"
#include "seqdml/simulator.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

using namespace seqdml;

namespace {

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

IntVector ivec(std::initializer_list<int> values) {
    IntVector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (int x : values) v(i++) = x;
    return v;
}

}  // namespace

TEST_CASE("constant propensities trim nothing") {
    const Vector p = Vector::Constant(10, 0.5);
    IntVector i1(10);
    for (int i = 0; i < 10; ++i) i1(i) = i % 2;
    const TrimResult r = minmax_trim_period1(p, i1);
    REQUIRE(r.low == 0.5);
    REQUIRE(r.high == 0.5);
    for (auto k : r.keep) REQUIRE(k == 1);
}

TEST_CASE("interval overlap picks the tighter bounds") {
    // Followers span [0.1, 0.9], the rest [0.2, 0.8].
    const Vector p = vec({0.1, 0.5, 0.9, 0.2, 0.6, 0.8});
    const IntVector i1 = ivec({1, 1, 1, 0, 0, 0});
    const TrimResult r = minmax_trim_period1(p, i1);
    REQUIRE(r.low == 0.2);
    REQUIRE(r.high == 0.8);
    REQUIRE(r.keep == std::vector<std::uint8_t>{0, 1, 0, 1, 1, 1});
}

TEST_CASE("every retained unit lies within the thresholds") {
    Rng rng(31);
    const int n = 500;
    Vector p(n);
    IntVector i1(n);
    for (int i = 0; i < n; ++i) {
        p(i) = rng.uniform();
        i1(i) = rng.bernoulli(0.4) ? 1 : 0;
    }
    const TrimResult r = minmax_trim_period1(p, i1);
    for (int i = 0; i < n; ++i)
        if (r.keep[static_cast<std::size_t>(i)] == 1) {
            REQUIRE(p(i) >= r.low);
            REQUIRE(p(i) <= r.high);
        } else {
            REQUIRE((p(i) < r.low || p(i) > r.high));
        }
}

TEST_CASE("one-sided period-1 split is an overlap error") {
    const Vector p = Vector::Constant(6, 0.5);
    REQUIRE_THROWS_AS(minmax_trim_period1(p, IntVector::Ones(6)), EstimationError);
}

TEST_CASE("a single-branch period-2 rule matches the period-1 rule") {
    Rng rng(32);
    const int n = 200;
    Vector p(n);
    IntVector i12(n);
    for (int i = 0; i < n; ++i) {
        p(i) = rng.uniform();
        i12(i) = rng.bernoulli(0.5) ? 1 : 0;
    }
    const std::vector<std::uint8_t> whole(static_cast<std::size_t>(n), 1);
    const TrimResult r2 = minmax_trim_period2(p, i12, whole);
    const TrimResult r1 = minmax_trim_period1(p, i12);
    REQUIRE(r2.low == r1.low);
    REQUIRE(r2.high == r1.high);
    REQUIRE(r2.keep == r1.keep);
}

TEST_CASE("a branch whose complement is empty is skipped") {
    const Vector p = vec({0.2, 0.4, 0.6, 0.9});
    const IntVector i12 = ivec({1, 1, 1, 0});
    // Branch covers only the three followers.
    const std::vector<std::uint8_t> branch{1, 1, 1, 0};
    const TrimResult r = minmax_trim_period2(p, i12, branch);
    REQUIRE(r.skipped);
    for (auto k : r.keep) REQUIRE(k == 1);
}

TEST_CASE("union trim with matching group ranges drops nothing") {
    // Identical propensity values in both follower groups: thresholds equal
    // the common extremes and the whole sample is retained.
    const int n = 200;
    PanelDataset ds;
    ds.x0.resize(n, 1);
    ds.x1 = Matrix::Zero(n, 1);
    ds.d1.resize(n);
    ds.d2 = IntVector::Zero(n);
    ds.y = Vector::Zero(n);
    Vector p1(n), p2(n);
    for (int i = 0; i < n; ++i) {
        ds.x0(i, 0) = 0.0;
        ds.d1(i) = i % 2;
        const double value = 0.3 + 0.4 * ((i / 2) % 50) / 49.0;  // same grid in both groups
        p1(i) = value;
        p2(i) = 0.5;
    }
    ds.n_treat1 = 2;
    ds.n_treat2 = 1;
    ds.y1_col = 0;
    ds.validate();

    NuisanceEstimates nuis;
    nuis.method = NuisanceMethod::bhl22;
    nuis.policy = Policy::make_static(1, 0, "s");
    nuis.p1_hat = p1;
    nuis.p2_hat = p2;
    nuis.mu_hat = Vector::Zero(n);
    nuis.nu_hat = Vector::Zero(n);

    const TrimReport report = union_trim(ds, {nuis.policy}, {nuis});
    REQUIRE(report.drop_count == 0);
    REQUIRE(report.drop_share == 0.0);
}

TEST_CASE("disjoint extreme sets add up across policies") {
    const int n = 100;
    PanelDataset ds;
    ds.x0.resize(n, 1);
    ds.x1 = Matrix::Zero(n, 1);
    ds.d1.resize(n);
    ds.d2 = IntVector::Zero(n);
    ds.y = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
        ds.x0(i, 0) = static_cast<double>(i);
        ds.d1(i) = i % 2;
    }
    ds.n_treat1 = 2;
    ds.n_treat2 = 1;
    ds.y1_col = 0;
    ds.validate();

    // Policy A: three units sit below everyone else. Policy B: two units sit
    // above. The union must drop exactly five.
    auto base = Vector::Constant(n, 0.5);
    NuisanceEstimates a;
    a.method = NuisanceMethod::bhl22;
    a.policy = Policy::make_static(1, 0, "a");
    a.p1_hat = base;
    a.p1_hat(0) = a.p1_hat(2) = a.p1_hat(4) = 0.01;  // even rows are non-followers
    a.p2_hat = Vector::Constant(n, 0.5);
    a.mu_hat = a.nu_hat = Vector::Zero(n);

    NuisanceEstimates b = a;
    b.policy = Policy::make_static(0, 0, "b");
    b.p1_hat = base;
    b.p1_hat(1) = b.p1_hat(3) = 0.99;
    b.p2_hat = Vector::Constant(n, 0.5);

    const TrimReport report = union_trim(ds, {a.policy, b.policy}, {a, b});
    REQUIRE(report.drop_count == 5);
    REQUIRE(report.policies[0].drop_count == 3);
    REQUIRE(report.policies[1].drop_count == 2);
    REQUIRE(!report.balance.empty());
}

TEST_CASE("standardized differences match hand arithmetic") {
    const Vector same = vec({1.0, 2.0, 3.0, 4.0});
    REQUIRE(standardized_difference(same, same) == 0.0);

    // Means 0 and 1, sample variances exactly 1.
    const Vector a = vec({-1.0, 1.0, -1.0, 1.0, 0.0});
    const Vector b = vec({0.0, 2.0, 0.0, 2.0, 1.0});
    REQUIRE(standardized_difference(a, b) == Catch::Approx(100.0).margin(1e-9));

    REQUIRE(imbalance_flag(20.0));
    REQUIRE(!imbalance_flag(19.999999));
}

TEST_CASE("standardized difference is symmetric and shift-invariant") {
    Rng rng(33);
    Vector a(40), b(60);
    for (int i = 0; i < 40; ++i) a(i) = rng.normal();
    for (int i = 0; i < 60; ++i) b(i) = 1.5 * rng.normal() + 0.7;
    const double d1 = standardized_difference(a, b);
    REQUIRE(standardized_difference(b, a) == d1);
    const double shift = 3.25;
    const Vector a_shift = a.array() + shift;
    const Vector b_shift = b.array() + shift;
    REQUIRE(standardized_difference(a_shift, b_shift) == Catch::Approx(d1).epsilon(1e-9));
}

TEST_CASE("degenerate spreads map to zero or infinity") {
    const Vector c1 = Vector::Constant(5, 2.0);
    const Vector c2 = Vector::Constant(5, 3.0);
    REQUIRE(standardized_difference(c1, c1) == 0.0);
    REQUIRE(std::isinf(standardized_difference(c1, c2)));
}

TEST_CASE("overlap summary concentrates constant propensities in one bin") {
    const Vector p = Vector::Constant(50, 0.42);
    IntVector i1(50);
    for (int i = 0; i < 50; ++i) i1(i) = i % 2;
    const OverlapSummary s = overlap_summary(p, i1);
    int occupied_f = 0, occupied_r = 0;
    for (int b = 0; b < OverlapSummary::kBins; ++b) {
        if (s.followers_hist[static_cast<std::size_t>(b)] > 0.0) ++occupied_f;
        if (s.rest_hist[static_cast<std::size_t>(b)] > 0.0) ++occupied_r;
    }
    REQUIRE(occupied_f == 1);
    REQUIRE(occupied_r == 1);
}

TEST_CASE("uniform propensities fill the bins evenly and masses normalize") {
    Rng rng(34);
    const int n = 10000;
    Vector p(n);
    IntVector i1(n);
    for (int i = 0; i < n; ++i) {
        p(i) = rng.uniform();
        i1(i) = rng.bernoulli(0.5) ? 1 : 0;
    }
    const OverlapSummary s = overlap_summary(p, i1);
    double sum_f = 0.0, sum_r = 0.0;
    for (int b = 0; b < OverlapSummary::kBins; ++b) {
        REQUIRE(s.followers_hist[static_cast<std::size_t>(b)] == Catch::Approx(0.02).margin(0.01));
        REQUIRE(s.rest_hist[static_cast<std::size_t>(b)] == Catch::Approx(0.02).margin(0.01));
        sum_f += s.followers_hist[static_cast<std::size_t>(b)];
        sum_r += s.rest_hist[static_cast<std::size_t>(b)];
    }
    REQUIRE(sum_f == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(sum_r == Catch::Approx(1.0).margin(1e-9));
}

#include "seqdml/folds.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

using namespace seqdml;

namespace {

void check_plan_invariants(const FoldPlan& plan, int n, int k_folds) {
    REQUIRE(plan.n() == n);
    REQUIRE(plan.k_folds == k_folds);

    std::vector<int> sizes(static_cast<std::size_t>(k_folds), 0);
    for (int id : plan.fold_id) {
        REQUIRE(id >= 0);
        REQUIRE(id < k_folds);
        ++sizes[static_cast<std::size_t>(id)];
    }
    const int min_size = *std::min_element(sizes.begin(), sizes.end());
    const int max_size = *std::max_element(sizes.begin(), sizes.end());
    REQUIRE(max_size - min_size <= 1);

    for (int k = 0; k < k_folds; ++k) {
        int h0 = 0, h1 = 0;
        for (int i = 0; i < n; ++i) {
            if (plan.in_fold(i, k)) {
                REQUIRE(plan.half_id[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] == 2);
            } else {
                const int h = plan.half_of(i, k);
                REQUIRE((h == 0 || h == 1));
                (h == 0 ? h0 : h1)++;
            }
        }
        REQUIRE(std::abs(h0 - h1) <= 1);
        REQUIRE(h0 + h1 == n - static_cast<int>(sizes[static_cast<std::size_t>(k)]));
    }
}

}  // namespace

TEST_CASE("ten units over five folds gives forced sizes") {
    const FoldPlan plan = make_fold_plan(10, 5, 0);
    std::vector<int> sizes(5, 0);
    for (int id : plan.fold_id) ++sizes[static_cast<std::size_t>(id)];
    for (int s : sizes) REQUIRE(s == 2);
}

TEST_CASE("eleven units over five folds gives one fold of three") {
    const FoldPlan plan = make_fold_plan(11, 5, 0);
    std::vector<int> sizes(5, 0);
    for (int id : plan.fold_id) ++sizes[static_cast<std::size_t>(id)];
    std::sort(sizes.begin(), sizes.end());
    REQUIRE(sizes == std::vector<int>{2, 2, 2, 2, 3});
}

TEST_CASE("identical inputs give identical plans") {
    const FoldPlan a = make_fold_plan(137, 5, 42);
    const FoldPlan b = make_fold_plan(137, 5, 42);
    REQUIRE(a.fold_id == b.fold_id);
    REQUIRE(a.half_id == b.half_id);

    const FoldPlan c = make_fold_plan(137, 5, 43);
    REQUIRE(a.fold_id != c.fold_id);
}

TEST_CASE("plan invariants hold across a sweep of sizes") {
    for (int k_folds : {2, 3, 5, 7}) {
        for (int n = k_folds; n <= 500; n += 13) check_plan_invariants(make_fold_plan(n, k_folds, 7), n, k_folds);
        check_plan_invariants(make_fold_plan(500, k_folds, 11), 500, k_folds);
    }
    // Odd fold sizes stress the per-complement half balance.
    check_plan_invariants(make_fold_plan(15, 5, 3), 15, 5);
    check_plan_invariants(make_fold_plan(25, 5, 3), 25, 5);
}

TEST_CASE("K outside [2, N] is rejected") {
    REQUIRE_THROWS_AS(make_fold_plan(5, 6, 0), ConfigError);
    REQUIRE_THROWS_AS(make_fold_plan(5, 1, 0), ConfigError);
}

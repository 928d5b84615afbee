#pragma once

#include "seqdml/common.hpp"

#include <cstdint>
#include <numeric>
#include <vector>

namespace seqdml {

// Cross-fitting plan: a K-way partition plus, for every fold k, a two-way
// split of the complement set W_{-k}. The halves are drawn per complement
// (not from one global label), so that within every complement the two
// halves differ in size by at most one for any (N, K).
struct FoldPlan {
    int k_folds = 0;
    std::vector<int> fold_id;                       // length N, values 0..K-1
    std::vector<std::vector<std::uint8_t>> half_id; // [k][i]: 0/1 for i outside fold k, 2 inside

    int n() const { return static_cast<int>(fold_id.size()); }

    bool in_fold(int unit, int k) const { return fold_id[static_cast<std::size_t>(unit)] == k; }

    // Half membership of `unit` within complement W_{-k}; unit must not be in fold k.
    int half_of(int unit, int k) const {
        return half_id[static_cast<std::size_t>(k)][static_cast<std::size_t>(unit)];
    }

    std::vector<int> fold_members(int k) const {
        std::vector<int> out;
        for (int i = 0; i < n(); ++i)
            if (fold_id[static_cast<std::size_t>(i)] == k) out.push_back(i);
        return out;
    }

    std::vector<int> complement_members(int k) const {
        std::vector<int> out;
        for (int i = 0; i < n(); ++i)
            if (fold_id[static_cast<std::size_t>(i)] != k) out.push_back(i);
        return out;
    }
};

// Deterministic permutation-based assignment: fold sizes differ by at most
// one, complements are split into near-equal halves, and the whole plan is a
// pure function of (N, K, seed).
inline FoldPlan make_fold_plan(int n, int k_folds, std::uint64_t seed) {
    if (k_folds < 2) throw ConfigError("make_fold_plan: K must be at least 2, got " + std::to_string(k_folds));
    if (k_folds > n)
        throw ConfigError("make_fold_plan: K=" + std::to_string(k_folds) + " exceeds N=" + std::to_string(n));

    FoldPlan plan;
    plan.k_folds = k_folds;
    plan.fold_id.assign(static_cast<std::size_t>(n), 0);

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, 0xF01D));
    rng.shuffle(perm);

    // First N % K folds take the extra unit.
    int pos = 0;
    for (int k = 0; k < k_folds; ++k) {
        const int size = n / k_folds + (k < n % k_folds ? 1 : 0);
        for (int j = 0; j < size; ++j) plan.fold_id[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos++)])] = k;
    }

    plan.half_id.assign(static_cast<std::size_t>(k_folds), std::vector<std::uint8_t>(static_cast<std::size_t>(n), 2));
    for (int k = 0; k < k_folds; ++k) {
        std::vector<int> comp = plan.complement_members(k);
        Rng half_rng(derive_seed(seed, 0x4A1F, static_cast<std::uint64_t>(k)));
        half_rng.shuffle(comp);
        for (std::size_t j = 0; j < comp.size(); ++j)
            plan.half_id[static_cast<std::size_t>(k)][static_cast<std::size_t>(comp[j])] =
                static_cast<std::uint8_t>(j < (comp.size() + 1) / 2 ? 0 : 1);
    }
    return plan;
}

}  // namespace seqdml

#pragma once

#include "seqdml/common.hpp"
#include "seqdml/panel.hpp"

#include <string>
#include <utility>

namespace seqdml {

enum class PolicyKind { static_seq, dynamic_on_v1 };

// Pair of deterministic assignment rules (g1, g2). The first-period rule is
// a constant treatment; the second-period rule may branch on the binary
// decision variable flagged by the dataset's y1_col. A static sequence is
// the special case where both branches assign the same treatment.
struct Policy {
    PolicyKind kind = PolicyKind::static_seq;
    int d1_target = 0;
    int d2_if_v1_zero = 0;
    int d2_if_v1_one = 0;
    std::string name;

    static Policy make_static(int d1, int d2, std::string name = "") {
        Policy p;
        p.kind = PolicyKind::static_seq;
        p.d1_target = d1;
        p.d2_if_v1_zero = d2;
        p.d2_if_v1_one = d2;
        p.name = std::move(name);
        return p;
    }

    static Policy make_dynamic(int d1, int d2_stay, int d2_exit, std::string name = "") {
        Policy p;
        p.kind = PolicyKind::dynamic_on_v1;
        p.d1_target = d1;
        p.d2_if_v1_zero = d2_stay;
        p.d2_if_v1_one = d2_exit;
        p.name = std::move(name);
        return p;
    }

    bool is_dynamic() const { return kind == PolicyKind::dynamic_on_v1; }

    void validate(const PanelDataset& ds) const {
        if (d1_target < 0 || d1_target >= ds.n_treat1)
            throw ValidationError("policy '" + name + "': first-period treatment " +
                                  std::to_string(d1_target) + " does not exist");
        if (d2_if_v1_zero < 0 || d2_if_v1_zero >= ds.n_treat2 || d2_if_v1_one < 0 ||
            d2_if_v1_one >= ds.n_treat2)
            throw ValidationError("policy '" + name + "': second-period treatment out of range");
        if (kind == PolicyKind::static_seq && d2_if_v1_zero != d2_if_v1_one)
            throw ValidationError("policy '" + name + "': static policy with diverging branches");
        if (kind == PolicyKind::dynamic_on_v1 && !ds.y1_col)
            throw ConfigError("policy '" + name +
                              "' branches on the intermediate outcome but the dataset has no y1_col");
    }

    std::string describe(const PanelDataset& ds) const {
        if (!is_dynamic())
            return ds.d1_label(d1_target) + " -> " + ds.d2_label(d2_if_v1_zero);
        return ds.d1_label(d1_target) + " -> " + ds.d2_label(d2_if_v1_zero) + " if v1=0 else " +
               ds.d2_label(d2_if_v1_one);
    }
};

struct PolicyTargets {
    IntVector g1;  // first-period target per unit (constant for this policy family)
    IntVector g2;  // second-period target, evaluated at the observed decision variable
};

// Target treatments per unit. g2 is evaluated at the *observed* decision
// variable, which is valid for score construction only on units with
// D1 = g1; downstream modules enforce this through follow indicators.
inline PolicyTargets policy_targets(const PanelDataset& ds, const Policy& pol) {
    pol.validate(ds);
    PolicyTargets t;
    t.g1 = IntVector::Constant(ds.n(), pol.d1_target);
    t.g2.resize(ds.n());
    if (!pol.is_dynamic()) {
        t.g2.setConstant(pol.d2_if_v1_zero);
    } else {
        const int col = *ds.y1_col;
        for (int i = 0; i < ds.n(); ++i)
            t.g2(i) = ds.x1(i, col) == 1.0 ? pol.d2_if_v1_one : pol.d2_if_v1_zero;
    }
    return t;
}

struct FollowIndicators {
    IntVector i1;   // 1{D1 = g1}
    IntVector i12;  // 1{D1 = g1} * 1{D2 = g2}, so i12 <= i1 elementwise
};

inline FollowIndicators follow_indicators(const PanelDataset& ds, const Policy& pol) {
    const PolicyTargets t = policy_targets(ds, pol);
    FollowIndicators f;
    f.i1.resize(ds.n());
    f.i12.resize(ds.n());
    for (int i = 0; i < ds.n(); ++i) {
        f.i1(i) = ds.d1(i) == t.g1(i) ? 1 : 0;
        f.i12(i) = (f.i1(i) == 1 && ds.d2(i) == t.g2(i)) ? 1 : 0;
    }
    return f;
}

}  // namespace seqdml

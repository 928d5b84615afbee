#include "seqdml/panel.hpp"
#include "seqdml/policy.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using namespace seqdml;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

CsvSchema small_schema() {
    CsvSchema schema;
    schema.x0_cols = {"x0_a"};
    schema.d1_col = "d1";
    schema.x1_cols = {"x1_a"};
    schema.d2_col = "d2";
    schema.y_col = "y";
    return schema;
}

PanelDataset hand_dataset() {
    PanelDataset ds;
    ds.x0.resize(6, 2);
    ds.x0 << 0.1, 1.0 / 3.0, -0.25, 2.0, 0.7, -1e-8, 3.25, 0.5, -2.5, 1e16, 0.0, -0.125;
    ds.x1.resize(6, 2);
    ds.x1 << 1.5, 0.0, -0.5, 1.0, 2.25, 0.0, 0.125, 1.0, -3.5, 0.0, 0.75, 1.0;
    ds.d1.resize(6);
    ds.d1 << 0, 1, 0, 1, 1, 0;
    ds.d2.resize(6);
    ds.d2 << 0, 1, 2, 1, 0, 2;
    ds.y.resize(6);
    ds.y << 1.0, -0.5, 1.0 / 7.0, 3.75, 0.0, 2.5;
    ds.n_treat1 = 2;
    ds.n_treat2 = 3;
    ds.y1_col = 1;
    ds.x0_names = {"age", "skill"};
    ds.x1_names = {"earn", "v1"};
    IntVector z(6);
    z << 0, 1, 0, 1, 0, 1;
    ds.z0 = z;
    ds.validate();
    return ds;
}

}  // namespace

TEST_CASE("four-row CSV loads with expected shape") {
    const std::string path = write_temp("seqdml_small.csv",
                                        "x0_a,d1,x1_a,d2,y\n"
                                        "0.5,0,1.5,1,2.0\n"
                                        "1.5,1,0.5,0,1.0\n"
                                        "-0.5,0,2.5,1,3.0\n"
                                        "2.5,1,1.0,0,0.5\n");
    const PanelDataset ds = load_csv(path, small_schema());
    REQUIRE(ds.n() == 4);
    REQUIRE(ds.p0() == 1);
    REQUIRE(ds.p1() == 1);
    REQUIRE(ds.n_treat1 == 2);
    REQUIRE(ds.d1(1) == 1);
    REQUIRE(ds.y(2) == 3.0);
}

TEST_CASE("out-of-range treatment id is rejected with the row named") {
    const std::string path = write_temp("seqdml_bad_d1.csv",
                                        "x0_a,d1,x1_a,d2,y\n"
                                        "0.5,0,1.5,1,2.0\n"
                                        "1.5,7,0.5,0,1.0\n");
    CsvSchema schema = small_schema();
    schema.d1_labels = {"JA", "TC", "EP", "WS", "NP"};  // ids 0..4
    try {
        load_csv(path, schema);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        REQUIRE(std::string(e.what()).find("7") != std::string::npos);
        REQUIRE(std::string(e.what()).find("row 1") != std::string::npos);
    }
}

TEST_CASE("z0 cardinality above the maximum is rejected") {
    std::string content = "x0_a,d1,x1_a,d2,y,z0\n";
    for (int i = 0; i < 25; ++i)
        content += "0.5," + std::to_string(i % 2) + ",1.0," + std::to_string(i % 2) + ",1.0," +
                   std::to_string(i) + "\n";
    const std::string path = write_temp("seqdml_z0.csv", content);
    CsvSchema schema = small_schema();
    schema.z0_col = "z0";
    REQUIRE_THROWS_AS(load_csv(path, schema), ValidationError);
}

TEST_CASE("missing schema column and bad cells are named") {
    const std::string path = write_temp("seqdml_missing.csv", "x0_a,d1,d2,y\n0.5,0,1,2.0\n");
    REQUIRE_THROWS_AS(load_csv(path, small_schema()), SchemaError);

    const std::string bad = write_temp("seqdml_bady.csv",
                                       "x0_a,d1,x1_a,d2,y\n0.5,0,1.5,1,2.0\n0.5,0,1.5,1,oops\n");
    REQUIRE_THROWS_AS(load_csv(bad, small_schema()), ParseError);

    const std::string missing_cell =
        write_temp("seqdml_na.csv", "x0_a,d1,x1_a,d2,y\n0.5,0,NA,1,2.0\n");
    REQUIRE_THROWS_AS(load_csv(missing_cell, small_schema()), ValidationError);
}

TEST_CASE("categorical covariates expand one-hot in lexicographic order") {
    const std::string path = write_temp("seqdml_cat.csv",
                                        "region,d1,x1_a,d2,y\n"
                                        "west,0,1.0,0,1.0\n"
                                        "east,1,2.0,1,2.0\n"
                                        "north,0,3.0,0,3.0\n");
    CsvSchema schema = small_schema();
    schema.x0_cols = {"region"};
    const PanelDataset ds = load_csv(path, schema);
    REQUIRE(ds.x0_names == std::vector<std::string>{"region=east", "region=north", "region=west"});
    REQUIRE(ds.x0(0, 2) == 1.0);
    REQUIRE(ds.x0(1, 0) == 1.0);
    REQUIRE(ds.x0(2, 1) == 1.0);
    REQUIRE(ds.x0.row(0).sum() == 1.0);
}

TEST_CASE("save then load round-trips bit-identically") {
    const PanelDataset ds = hand_dataset();
    const std::string path =
        (std::filesystem::temp_directory_path() / "seqdml_roundtrip.csv").string();
    save_csv(ds, path);
    const PanelDataset back = load_csv(path, roundtrip_schema(ds));

    REQUIRE(back.n() == ds.n());
    REQUIRE(back.x0 == ds.x0);
    REQUIRE(back.x1 == ds.x1);
    REQUIRE(back.d1 == ds.d1);
    REQUIRE(back.d2 == ds.d2);
    REQUIRE(back.y == ds.y);
    REQUIRE(back.n_treat1 == ds.n_treat1);
    REQUIRE(back.n_treat2 == ds.n_treat2);
    REQUIRE(*back.y1_col == *ds.y1_col);
    REQUIRE(*back.z0 == *ds.z0);
}

TEST_CASE("static policy targets are constant") {
    const PanelDataset ds = hand_dataset();
    const Policy pol = Policy::make_static(1, 2, "ws-ws");
    const PolicyTargets t = policy_targets(ds, pol);
    for (int i = 0; i < ds.n(); ++i) {
        REQUIRE(t.g1(i) == 1);
        REQUIRE(t.g2(i) == 2);
    }
}

TEST_CASE("dynamic policy routes to the exit branch when v1 is one") {
    const PanelDataset ds = hand_dataset();  // v1 = x1 col 1 alternates 0,1
    const Policy pol = Policy::make_dynamic(0, 1, 2, "stay-or-exit");
    const PolicyTargets t = policy_targets(ds, pol);
    for (int i = 0; i < ds.n(); ++i) REQUIRE(t.g2(i) == (ds.x1(i, 1) == 1.0 ? 2 : 1));
}

TEST_CASE("dynamic policy on all-zero v1 equals the static one") {
    PanelDataset ds = hand_dataset();
    ds.x1.col(1).setZero();
    const Policy dyn = Policy::make_dynamic(0, 1, 2, "dyn");
    const Policy stat = Policy::make_static(0, 1, "stat");
    const PolicyTargets td = policy_targets(ds, dyn);
    const PolicyTargets ts = policy_targets(ds, stat);
    REQUIRE(td.g1 == ts.g1);
    REQUIRE(td.g2 == ts.g2);
}

TEST_CASE("dynamic policy without a decision column is a configuration error") {
    PanelDataset ds = hand_dataset();
    ds.y1_col.reset();
    const Policy pol = Policy::make_dynamic(0, 1, 2, "dyn");
    REQUIRE_THROWS_AS(policy_targets(ds, pol), ConfigError);
}

TEST_CASE("follow indicators match their definition") {
    const PanelDataset ds = hand_dataset();

    // Unit 1 has (D1, D2) = (1, 1) and v1 = 1; a dynamic policy with exit
    // branch 1 catches it exactly.
    const Policy pol = Policy::make_dynamic(1, 0, 1, "tc-then-np");
    const FollowIndicators f = follow_indicators(ds, pol);
    REQUIRE(f.i1(1) == 1);
    REQUIRE(f.i12(1) == 1);

    for (int i = 0; i < ds.n(); ++i) {
        if (ds.d1(i) != 1) {
            REQUIRE(f.i1(i) == 0);
            REQUIRE(f.i12(i) == 0);
        }
        REQUIRE(f.i12(i) <= f.i1(i));
    }
}

TEST_CASE("follower count matches an independent row scan") {
    // Randomized panel, then compare sum(i12) against a direct scan that
    // re-derives the policy branch per row.
    Rng rng(123);
    const int n = 500;
    PanelDataset ds;
    ds.x0 = Matrix::Zero(n, 1);
    ds.x1.resize(n, 1);
    ds.d1.resize(n);
    ds.d2.resize(n);
    ds.y = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
        ds.x0(i, 0) = rng.normal();
        ds.d1(i) = static_cast<int>(rng.uniform_int(3));
        ds.x1(i, 0) = rng.bernoulli(0.4) ? 1.0 : 0.0;
        ds.d2(i) = static_cast<int>(rng.uniform_int(4));
    }
    ds.n_treat1 = 3;
    ds.n_treat2 = 4;
    ds.y1_col = 0;
    ds.validate();

    const Policy pol = Policy::make_dynamic(2, 1, 3, "probe");
    const FollowIndicators f = follow_indicators(ds, pol);

    int expected = 0;
    for (int i = 0; i < n; ++i) {
        const int want_d2 = ds.x1(i, 0) == 1.0 ? 3 : 1;
        if (ds.d1(i) == 2 && ds.d2(i) == want_d2) ++expected;
    }
    REQUIRE(f.i12.sum() == expected);
}

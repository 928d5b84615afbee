#pragma once

#include "seqdml/common.hpp"
#include "seqdml/learners.hpp"
#include "seqdml/nuisance.hpp"
#include "seqdml/panel.hpp"
#include "seqdml/policy.hpp"
#include "seqdml/simulator.hpp"

#include <json.hpp>

#include <cstdlib>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace seqdml {

using Json = nlohmann::ordered_json;

enum class EstimatorMethod { bhl22, bjz24, static_conf, ipw, gcomp };

inline std::string to_string(EstimatorMethod m) {
    switch (m) {
        case EstimatorMethod::bhl22: return "bhl22";
        case EstimatorMethod::bjz24: return "bjz24";
        case EstimatorMethod::static_conf: return "static_conf";
        case EstimatorMethod::ipw: return "ipw";
        case EstimatorMethod::gcomp: return "gcomp";
    }
    return "?";
}

inline EstimatorMethod estimator_from_string(const std::string& s) {
    if (s == "bhl22") return EstimatorMethod::bhl22;
    if (s == "bjz24") return EstimatorMethod::bjz24;
    if (s == "static_conf") return EstimatorMethod::static_conf;
    if (s == "ipw") return EstimatorMethod::ipw;
    if (s == "gcomp") return EstimatorMethod::gcomp;
    throw ConfigError("unknown estimator '" + s + "'");
}

struct TrimmingConfig {
    bool enabled = true;
    bool refit_after_trim = false;
};

struct DumpConfig {
    bool nuisances = false;
    bool scores = false;
};

struct BenchmarkConfig {
    int n_seeds = 20;
    std::vector<EstimatorMethod> estimators{EstimatorMethod::bhl22, EstimatorMethod::bjz24};
    int oracle_replications = 200000;  // for non-enumerable truths
};

using DgpVariant = std::variant<DgpConfig, EnumerableDgpConfig>;

// One structured config drives every command; command-line flags override
// scalar fields only.
struct RunConfig {
    std::string command;
    std::uint64_t seed = 0;
    int workers = 0;  // 0 = SEQDML_WORKERS env var, then hardware
    std::string output_dir = ".";

    // estimate / trim-report
    std::string input_csv;
    CsvSchema schema;
    std::vector<Policy> policies;
    EstimatorMethod estimator = EstimatorMethod::bhl22;
    int k_folds = 5;
    int min_cell = 10;
    bool bhl22_swap = false;
    NuisanceLearners learners;
    TrimmingConfig trimming;
    DumpConfig dumps;

    // simulate / benchmark
    std::optional<DgpVariant> dgp;
    std::string out_csv = "panel.csv";
    BenchmarkConfig bench;

    int effective_workers() const {
        if (workers > 0) return workers;
        if (const char* env = std::getenv("SEQDML_WORKERS")) {
            const int parsed = std::atoi(env);
            if (parsed > 0) return parsed;
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }

    NuisanceOptions nuisance_options() const {
        NuisanceOptions opts;
        opts.min_cell = min_cell;
        opts.bhl22_swap = bhl22_swap;
        return opts;
    }
};

namespace detail {

inline Vector json_vector(const Json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    Eigen::Index i = 0;
    for (const auto& x : j) v(i++) = x.get<double>();
    return v;
}

inline Matrix json_matrix(const Json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return Matrix(0, 0);
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Matrix m(rows, cols);
    Eigen::Index r = 0;
    for (const auto& row : j) {
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw ConfigError("ragged matrix in config");
        Eigen::Index c = 0;
        for (const auto& x : row) m(r, c++) = x.get<double>();
        ++r;
    }
    return m;
}

inline Json vector_json(const Vector& v) {
    Json j = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
    return j;
}

inline Json matrix_json(const Matrix& m) {
    Json j = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        j.push_back(std::move(row));
    }
    return j;
}

template <typename T>
T get_or(const Json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

}  // namespace detail

inline LearnerSpec learner_spec_from_json(const Json& j) {
    LearnerSpec spec;
    spec.family = learner_family_from_string(j.at("family").get<std::string>());
    spec.lambda = detail::get_or(j, "lambda", spec.lambda);
    spec.n_trees = detail::get_or(j, "n_trees", spec.n_trees);
    spec.max_depth = detail::get_or(j, "max_depth", spec.max_depth);
    spec.min_leaf = detail::get_or(j, "min_leaf", spec.min_leaf);
    spec.features_per_split = detail::get_or(j, "features_per_split", spec.features_per_split);
    spec.bootstrap = detail::get_or(j, "bootstrap", spec.bootstrap);
    spec.clip = detail::get_or(j, "clip", spec.clip);
    spec.seed = detail::get_or(j, "seed", spec.seed);
    spec.n_workers = detail::get_or(j, "n_workers", spec.n_workers);
    spec.validate();
    return spec;
}

inline Json learner_spec_to_json(const LearnerSpec& spec) {
    Json j;
    j["family"] = to_string(spec.family);
    j["lambda"] = spec.lambda;
    j["n_trees"] = spec.n_trees;
    j["max_depth"] = spec.max_depth;
    j["min_leaf"] = spec.min_leaf;
    j["features_per_split"] = spec.features_per_split;
    j["bootstrap"] = spec.bootstrap;
    j["clip"] = spec.clip;
    return j;
}

inline Policy policy_from_json(const Json& j) {
    const std::string kind = detail::get_or<std::string>(j, "kind", "static");
    const std::string name = detail::get_or<std::string>(j, "name", "");
    const int d1 = j.at("d1").get<int>();
    if (kind == "static") {
        if (j.contains("d2")) return Policy::make_static(d1, j.at("d2").get<int>(), name);
        return Policy::make_static(d1, j.at("d2_if_v1_zero").get<int>(), name);
    }
    if (kind == "dynamic_on_v1")
        return Policy::make_dynamic(d1, j.at("d2_if_v1_zero").get<int>(),
                                    j.at("d2_if_v1_one").get<int>(), name);
    throw ConfigError("unknown policy kind '" + kind + "'");
}

inline Json policy_to_json(const Policy& p) {
    Json j;
    j["name"] = p.name;
    j["kind"] = p.is_dynamic() ? "dynamic_on_v1" : "static";
    j["d1"] = p.d1_target;
    j["d2_if_v1_zero"] = p.d2_if_v1_zero;
    j["d2_if_v1_one"] = p.d2_if_v1_one;
    return j;
}

inline CsvSchema schema_from_json(const Json& j) {
    CsvSchema schema;
    schema.x0_cols = j.at("x0").get<std::vector<std::string>>();
    schema.d1_col = j.at("d1").get<std::string>();
    schema.x1_cols = j.at("x1").get<std::vector<std::string>>();
    schema.d2_col = j.at("d2").get<std::string>();
    schema.y_col = j.at("y").get<std::string>();
    if (j.contains("y1_col")) schema.y1_col = j.at("y1_col").get<std::string>();
    if (j.contains("z0")) schema.z0_col = j.at("z0").get<std::string>();
    schema.d1_labels = detail::get_or(j, "d1_labels", schema.d1_labels);
    schema.d2_labels = detail::get_or(j, "d2_labels", schema.d2_labels);
    schema.z0_max_cardinality = detail::get_or(j, "z0_max_cardinality", schema.z0_max_cardinality);
    return schema;
}

inline DgpConfig linear_dgp_from_json(const Json& j) {
    DgpConfig cfg = DgpConfig::zeroed(j.at("n").get<int>(), j.at("p0").get<int>(),
                                      j.at("n_treat1").get<int>(), j.at("n_treat2").get<int>(),
                                      j.at("p1_cont").get<int>());
    auto vec = [&](const char* key, Vector& into) {
        if (j.contains(key)) into = detail::json_vector(j.at(key));
    };
    auto mat = [&](const char* key, Matrix& into) {
        if (j.contains(key)) into = detail::json_matrix(j.at(key));
    };
    vec("d1_intercept", cfg.d1_intercept);
    mat("d1_x0_coef", cfg.d1_x0_coef);
    mat("x1_x0_coef", cfg.x1_x0_coef);
    mat("x1_d1_shift", cfg.x1_d1_shift);
    cfg.x1_noise_sd = detail::get_or(j, "x1_noise_sd", cfg.x1_noise_sd);
    cfg.v1_intercept = detail::get_or(j, "v1_intercept", cfg.v1_intercept);
    vec("v1_x0_coef", cfg.v1_x0_coef);
    vec("v1_d1_shift", cfg.v1_d1_shift);
    vec("d2_intercept", cfg.d2_intercept);
    mat("d2_x0_coef", cfg.d2_x0_coef);
    mat("d2_x1_coef", cfg.d2_x1_coef);
    mat("d2_d1_shift", cfg.d2_d1_shift);
    cfg.y_intercept = detail::get_or(j, "y_intercept", cfg.y_intercept);
    vec("y_x0_coef", cfg.y_x0_coef);
    vec("y_x1_coef", cfg.y_x1_coef);
    vec("y_d1_effect", cfg.y_d1_effect);
    vec("y_d2_effect", cfg.y_d2_effect);
    mat("y_d1d2_effect", cfg.y_d1d2_effect);
    vec("y_v1_d2_effect", cfg.y_v1_d2_effect);
    cfg.y_noise_sd = detail::get_or(j, "y_noise_sd", cfg.y_noise_sd);
    cfg.d1_to_x1 = detail::get_or(j, "d1_to_x1", cfg.d1_to_x1);
    cfg.x1_to_d2 = detail::get_or(j, "x1_to_d2", cfg.x1_to_d2);
    cfg.x1_to_y = detail::get_or(j, "x1_to_y", cfg.x1_to_y);
    cfg.z0_groups = detail::get_or(j, "z0_groups", cfg.z0_groups);
    cfg.seed = detail::get_or(j, "seed", cfg.seed);
    cfg.validate();
    return cfg;
}

inline EnumerableDgpConfig enumerable_dgp_from_json(const Json& j) {
    EnumerableDgpConfig cfg;
    cfg.n = j.at("n").get<int>();
    cfg.n_atoms = j.at("n_atoms").get<int>();
    cfg.atom_probs = detail::json_vector(j.at("atom_probs"));
    cfg.n_treat1 = j.at("n_treat1").get<int>();
    cfg.n_treat2 = j.at("n_treat2").get<int>();
    cfg.p_d1 = detail::json_matrix(j.at("p_d1"));
    cfg.p_v1 = detail::json_matrix(j.at("p_v1"));
    cfg.p_d2 = j.at("p_d2").get<std::vector<double>>();
    cfg.y_mean = j.at("y_mean").get<std::vector<double>>();
    cfg.y_noise_halfwidth = detail::get_or(j, "y_noise_halfwidth", cfg.y_noise_halfwidth);
    cfg.z0_groups = detail::get_or(j, "z0_groups", cfg.z0_groups);
    cfg.seed = detail::get_or(j, "seed", cfg.seed);
    cfg.validate();
    return cfg;
}

inline DgpVariant dgp_from_json(const Json& j) {
    const std::string type = detail::get_or<std::string>(j, "type", "linear");
    if (type == "linear") return linear_dgp_from_json(j);
    if (type == "enumerable") return enumerable_dgp_from_json(j);
    throw ConfigError("unknown dgp type '" + type + "'");
}

inline RunConfig run_config_from_json(const Json& j) {
    RunConfig cfg;
    cfg.command = detail::get_or<std::string>(j, "command", "");
    cfg.seed = detail::get_or(j, "seed", cfg.seed);
    cfg.workers = detail::get_or(j, "workers", cfg.workers);
    cfg.output_dir = detail::get_or<std::string>(j, "output_dir", cfg.output_dir);
    cfg.input_csv = detail::get_or<std::string>(j, "input_csv", cfg.input_csv);
    if (j.contains("schema")) cfg.schema = schema_from_json(j.at("schema"));
    if (j.contains("policies"))
        for (const auto& p : j.at("policies")) cfg.policies.push_back(policy_from_json(p));
    if (j.contains("estimator")) cfg.estimator = estimator_from_string(j.at("estimator"));
    cfg.k_folds = detail::get_or(j, "k_folds", cfg.k_folds);
    cfg.min_cell = detail::get_or(j, "min_cell", cfg.min_cell);
    cfg.bhl22_swap = detail::get_or(j, "bhl22_swap", cfg.bhl22_swap);
    if (j.contains("learners")) {
        const Json& l = j.at("learners");
        if (l.contains("p1")) cfg.learners.p1 = learner_spec_from_json(l.at("p1"));
        if (l.contains("p2")) cfg.learners.p2 = learner_spec_from_json(l.at("p2"));
        if (l.contains("mu")) cfg.learners.mu = learner_spec_from_json(l.at("mu"));
        if (l.contains("nu")) cfg.learners.nu = learner_spec_from_json(l.at("nu"));
    } else {
        LearnerSpec prob;
        prob.family = LearnerFamily::logistic;
        LearnerSpec reg;
        reg.family = LearnerFamily::ridge_linear;
        cfg.learners = NuisanceLearners::all(prob, reg);
    }
    if (j.contains("trimming")) {
        cfg.trimming.enabled = detail::get_or(j.at("trimming"), "enabled", cfg.trimming.enabled);
        cfg.trimming.refit_after_trim =
            detail::get_or(j.at("trimming"), "refit_after_trim", cfg.trimming.refit_after_trim);
    }
    if (j.contains("dumps")) {
        cfg.dumps.nuisances = detail::get_or(j.at("dumps"), "nuisances", cfg.dumps.nuisances);
        cfg.dumps.scores = detail::get_or(j.at("dumps"), "scores", cfg.dumps.scores);
    }
    if (j.contains("dgp")) cfg.dgp = dgp_from_json(j.at("dgp"));
    cfg.out_csv = detail::get_or<std::string>(j, "out_csv", cfg.out_csv);
    if (j.contains("benchmark")) {
        const Json& b = j.at("benchmark");
        cfg.bench.n_seeds = detail::get_or(b, "n_seeds", cfg.bench.n_seeds);
        cfg.bench.oracle_replications =
            detail::get_or(b, "oracle_replications", cfg.bench.oracle_replications);
        if (b.contains("estimators")) {
            cfg.bench.estimators.clear();
            for (const auto& e : b.at("estimators"))
                cfg.bench.estimators.push_back(estimator_from_string(e.get<std::string>()));
        }
    }
    if (cfg.k_folds < 2) throw ConfigError("k_folds must be at least 2");
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse failure in " + path + ": " + e.what());
    }
    return run_config_from_json(j);
}

}  // namespace seqdml

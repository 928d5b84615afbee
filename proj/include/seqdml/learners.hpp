#pragma once

#include "seqdml/common.hpp"
#include "seqdml/forest.hpp"
#include "seqdml/logistic.hpp"
#include "seqdml/ridge.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace seqdml {

enum class LearnerFamily { ridge_linear, logistic, random_forest_reg, random_forest_prob };

inline std::string to_string(LearnerFamily f) {
    switch (f) {
        case LearnerFamily::ridge_linear: return "ridge_linear";
        case LearnerFamily::logistic: return "logistic";
        case LearnerFamily::random_forest_reg: return "random_forest_reg";
        case LearnerFamily::random_forest_prob: return "random_forest_prob";
    }
    return "?";
}

inline LearnerFamily learner_family_from_string(const std::string& s) {
    if (s == "ridge_linear" || s == "ridge") return LearnerFamily::ridge_linear;
    if (s == "logistic") return LearnerFamily::logistic;
    if (s == "random_forest_reg" || s == "forest_reg") return LearnerFamily::random_forest_reg;
    if (s == "random_forest_prob" || s == "forest_prob") return LearnerFamily::random_forest_prob;
    throw ConfigError("unknown learner family '" + s + "'");
}

struct LearnerSpec {
    LearnerFamily family = LearnerFamily::ridge_linear;
    double lambda = 1e-3;  // ridge / logistic penalty
    int n_trees = 500;
    int max_depth = -1;
    int min_leaf = 5;
    int features_per_split = 0;  // 0 = family default
    bool bootstrap = true;
    double clip = 1e-6;  // probability clip applied after row normalization
    std::uint64_t seed = 0;
    int n_workers = 1;

    void validate() const {
        if (lambda < 0.0) throw ConfigError("learner: lambda must be >= 0");
        if (n_trees < 1) throw ConfigError("learner: n_trees must be >= 1");
        if (min_leaf < 1) throw ConfigError("learner: min_leaf must be >= 1");
        if (clip <= 0.0 || clip >= 0.5) throw ConfigError("learner: clip must lie in (0, 0.5)");
    }

    detail::ForestParams forest_params() const {
        detail::ForestParams p;
        p.n_trees = n_trees;
        p.max_depth = max_depth;
        p.min_leaf = min_leaf;
        p.features_per_split = features_per_split;
        p.bootstrap = bootstrap;
        p.seed = seed;
        p.n_workers = n_workers;
        return p;
    }

    LearnerSpec with_seed(std::uint64_t s) const {
        LearnerSpec out = *this;
        out.seed = s;
        return out;
    }
};

// Constant-probability fallback for degenerate training strata where every
// row carries the same class.
class ConstantProbModel {
  public:
    ConstantProbModel(int n_classes, int sole_class) : n_classes_(n_classes), sole_class_(sole_class) {}

    Matrix predict_proba(const Matrix& features) const {
        Matrix proba = Matrix::Zero(features.rows(), n_classes_);
        proba.col(sole_class_).setOnes();
        return proba;
    }

  private:
    int n_classes_;
    int sole_class_;
};

class RegressionModel {
  public:
    RegressionModel() = default;
    explicit RegressionModel(RidgeModel m) : impl_(std::move(m)) {}
    explicit RegressionModel(ForestRegModel m) : impl_(std::move(m)) {}

    Vector predict(const Matrix& features) const {
        return std::visit([&](const auto& m) { return m.predict(features); }, impl_);
    }

  private:
    std::variant<RidgeModel, ForestRegModel> impl_;
};

class ProbModel {
  public:
    ProbModel() = default;
    explicit ProbModel(LogisticModel m, double clip) : impl_(std::move(m)), clip_(clip) {}
    explicit ProbModel(ForestProbModel m, double clip) : impl_(std::move(m)), clip_(clip) {}
    explicit ProbModel(ConstantProbModel m, double clip) : impl_(std::move(m)), clip_(clip) {}

    // Rows sum to one before clipping; clipping then bounds every entry away
    // from 0 and 1 because the scores divide by these probabilities.
    Matrix predict_proba(const Matrix& features) const {
        Matrix proba = std::visit([&](const auto& m) { return m.predict_proba(features); }, impl_);
        for (Eigen::Index i = 0; i < proba.rows(); ++i)
            for (Eigen::Index j = 0; j < proba.cols(); ++j)
                proba(i, j) = std::min(std::max(proba(i, j), clip_), 1.0 - clip_);
        return proba;
    }

    Matrix predict_proba_raw(const Matrix& features) const {
        return std::visit([&](const auto& m) { return m.predict_proba(features); }, impl_);
    }

    std::vector<int> absent_classes() const {
        if (const auto* m = std::get_if<LogisticModel>(&impl_)) return m->absent_classes();
        if (const auto* m = std::get_if<ForestProbModel>(&impl_)) return m->absent_classes();
        return {};
    }

  private:
    std::variant<LogisticModel, ForestProbModel, ConstantProbModel> impl_;
    double clip_ = 1e-6;
};

inline RegressionModel fit_regressor(const Matrix& features, const Vector& targets,
                                     const LearnerSpec& spec) {
    spec.validate();
    if (features.rows() != targets.size())
        throw ValidationError("fit_regressor: feature rows and target length differ");
    if (features.rows() < std::max<Eigen::Index>(2, spec.min_leaf))
        throw ValidationError("fit_regressor: too few training rows (" +
                              std::to_string(features.rows()) + ")");
    switch (spec.family) {
        case LearnerFamily::ridge_linear:
            return RegressionModel(RidgeModel::fit(features, targets, spec.lambda));
        case LearnerFamily::random_forest_reg:
            return RegressionModel(ForestRegModel::fit(features, targets, spec.forest_params()));
        default:
            throw ConfigError("fit_regressor: " + to_string(spec.family) + " is not a regression family");
    }
}

inline Vector predict(const RegressionModel& model, const Matrix& features) {
    return model.predict(features);
}

inline ProbModel fit_classifier(const Matrix& features, const IntVector& labels, int n_classes,
                                const LearnerSpec& spec) {
    spec.validate();
    if (features.rows() != labels.size())
        throw ValidationError("fit_classifier: feature rows and label length differ");
    std::set<int> distinct(labels.data(), labels.data() + labels.size());
    if (distinct.size() < 2)
        throw EstimationError("fit_classifier: need at least 2 distinct labels, got " +
                              std::to_string(distinct.size()));
    switch (spec.family) {
        case LearnerFamily::logistic:
            return ProbModel(LogisticModel::fit(features, labels, n_classes, spec.lambda), spec.clip);
        case LearnerFamily::random_forest_prob:
            return ProbModel(ForestProbModel::fit(features, labels, n_classes, spec.forest_params()),
                             spec.clip);
        default:
            throw ConfigError("fit_classifier: " + to_string(spec.family) +
                              " is not a probability family");
    }
}

inline Matrix predict_proba(const ProbModel& model, const Matrix& features) {
    return model.predict_proba(features);
}

}  // namespace seqdml

#pragma once

#include "seqdml/common.hpp"

#include <vector>

namespace seqdml {

namespace detail {

// L2-penalized binary logistic regression fit by iteratively reweighted
// least squares. The intercept is unpenalized; a small positive penalty
// keeps separable designs finite.
inline Vector logistic_irls(const Matrix& features, const std::vector<double>& labels, double lambda,
                            int max_iter = 60, double tol = 1e-10) {
    const Eigen::Index n = features.rows();
    const Eigen::Index p = features.cols();
    Matrix design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = features;

    Vector beta = Vector::Zero(p + 1);
    for (int iter = 0; iter < max_iter; ++iter) {
        Vector eta = design * beta;
        Vector prob(n), weight(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            prob(i) = sigmoid(eta(i));
            weight(i) = std::max(prob(i) * (1.0 - prob(i)), 1e-12);
        }
        Matrix weighted = design;
        for (Eigen::Index i = 0; i < n; ++i) weighted.row(i) *= weight(i);
        Matrix hessian = design.transpose() * weighted;
        for (Eigen::Index j = 1; j <= p; ++j) hessian(j, j) += lambda;

        Vector grad = Vector::Zero(p + 1);
        for (Eigen::Index i = 0; i < n; ++i) grad += design.row(i).transpose() * (labels[static_cast<std::size_t>(i)] - prob(i));
        grad.tail(p) -= lambda * beta.tail(p);

        Vector step = hessian.ldlt().solve(grad);
        if (!step.allFinite()) throw NumericError("logistic: IRLS step is non-finite");
        beta += step;
        if (step.cwiseAbs().maxCoeff() < tol) break;
    }
    return beta;
}

}  // namespace detail

// Multiclass probabilities via one-vs-rest binary fits with row
// renormalization. Classes absent from the training rows keep a zero score
// and are reported through absent_classes.
class LogisticModel {
  public:
    LogisticModel() = default;

    static LogisticModel fit(const Matrix& features, const IntVector& labels, int n_classes,
                             double lambda) {
        LogisticModel model;
        model.n_classes_ = n_classes;
        std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
        for (Eigen::Index i = 0; i < labels.size(); ++i) ++counts[static_cast<std::size_t>(labels(i))];

        model.coef_.assign(static_cast<std::size_t>(n_classes), Vector());
        for (int c = 0; c < n_classes; ++c) {
            if (counts[static_cast<std::size_t>(c)] == 0) {
                model.absent_classes_.push_back(c);
                continue;
            }
            std::vector<double> binary(static_cast<std::size_t>(labels.size()));
            for (Eigen::Index i = 0; i < labels.size(); ++i)
                binary[static_cast<std::size_t>(i)] = labels(i) == c ? 1.0 : 0.0;
            model.coef_[static_cast<std::size_t>(c)] = detail::logistic_irls(features, binary, lambda);
        }
        return model;
    }

    // Row-normalized class probabilities, not yet clipped.
    Matrix predict_proba(const Matrix& features) const {
        const Eigen::Index n = features.rows();
        Matrix proba = Matrix::Zero(n, n_classes_);
        for (int c = 0; c < n_classes_; ++c) {
            const Vector& beta = coef_[static_cast<std::size_t>(c)];
            if (beta.size() == 0) continue;
            Vector eta = (features * beta.tail(beta.size() - 1)).array() + beta(0);
            for (Eigen::Index i = 0; i < n; ++i) proba(i, c) = sigmoid(eta(i));
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double total = proba.row(i).sum();
            if (total > 0.0) proba.row(i) /= total;
        }
        return proba;
    }

    const std::vector<int>& absent_classes() const { return absent_classes_; }

  private:
    int n_classes_ = 0;
    std::vector<Vector> coef_;
    std::vector<int> absent_classes_;
};

}  // namespace seqdml

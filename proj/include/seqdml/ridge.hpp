#pragma once

#include "seqdml/common.hpp"

#include <string>

namespace seqdml {

// Exact penalized least squares with an unpenalized intercept.
class RidgeModel {
  public:
    RidgeModel() = default;

    static RidgeModel fit(const Matrix& features, const Vector& targets, double lambda) {
        if (features.rows() != targets.size())
            throw ValidationError("ridge: feature rows and target length differ");
        if (features.rows() < 2) throw ValidationError("ridge: need at least 2 training rows");
        if (lambda < 0.0) throw ConfigError("ridge: penalty must be non-negative");

        const Eigen::Index n = features.rows();
        const Eigen::Index p = features.cols();
        Matrix design(n, p + 1);
        design.col(0).setOnes();
        design.rightCols(p) = features;

        Matrix gram = design.transpose() * design;
        for (Eigen::Index j = 1; j <= p; ++j) gram(j, j) += lambda;
        const Vector rhs = design.transpose() * targets;

        RidgeModel model;
        if (lambda == 0.0) {
            // Surface singular designs instead of returning a least-norm fit.
            Eigen::ColPivHouseholderQR<Matrix> qr(design);
            if (qr.rank() < p + 1)
                throw NumericError("ridge: singular design with lambda=0 (rank " +
                                   std::to_string(qr.rank()) + " of " + std::to_string(p + 1) + ")");
            model.coef_ = qr.solve(targets);
        } else {
            model.coef_ = gram.ldlt().solve(rhs);
        }
        if (!model.coef_.allFinite()) throw NumericError("ridge: non-finite coefficients");
        return model;
    }

    Vector predict(const Matrix& features) const {
        return (features * coef_.tail(coef_.size() - 1)).array() + coef_(0);
    }

    double intercept() const { return coef_(0); }
    Vector slopes() const { return coef_.tail(coef_.size() - 1); }

  private:
    Vector coef_;  // [intercept, slopes...]
};

}  // namespace seqdml

#include "seqdml/learners.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace seqdml;

namespace {

LearnerSpec ridge_spec(double lambda) {
    LearnerSpec s;
    s.family = LearnerFamily::ridge_linear;
    s.lambda = lambda;
    return s;
}

LearnerSpec forest_spec(LearnerFamily family, int n_trees, std::uint64_t seed) {
    LearnerSpec s;
    s.family = family;
    s.n_trees = n_trees;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("unpenalized ridge recovers an exact linear law") {
    const int n = 40;
    Matrix x(n, 1);
    Vector y(n);
    Rng rng(1);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        y(i) = 2.0 * x(i, 0);
    }
    const RegressionModel model = fit_regressor(x, y, ridge_spec(0.0));
    const Vector pred = predict(model, x);
    REQUIRE((pred - y).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("full shrinkage collapses predictions to the target mean") {
    const int n = 50;
    Matrix x(n, 2);
    Vector y(n);
    Rng rng(2);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        y(i) = 1.5 + x(i, 0) - 0.5 * x(i, 1) + 0.1 * rng.normal();
    }
    const RegressionModel model = fit_regressor(x, y, ridge_spec(1e14));
    const Vector pred = predict(model, x);
    REQUIRE((pred.array() - y.mean()).abs().maxCoeff() < 1e-6);
}

TEST_CASE("singular design with zero penalty surfaces a numeric error") {
    Matrix x(10, 2);
    Vector y(10);
    Rng rng(3);
    for (int i = 0; i < 10; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = 2.0 * x(i, 0);  // exactly collinear
        y(i) = x(i, 0);
    }
    REQUIRE_THROWS_AS(fit_regressor(x, y, ridge_spec(0.0)), NumericError);
    REQUIRE_NOTHROW(fit_regressor(x, y, ridge_spec(1e-3)));
}

TEST_CASE("forest regression tracks a step signal") {
    const int n = 200;
    Matrix x(n, 1);
    Vector y(n), signal(n);
    Rng rng(4);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        signal(i) = x(i, 0) > 0.0 ? 1.0 : 0.0;
        y(i) = signal(i) + 0.01 * rng.normal();
    }
    const RegressionModel model =
        fit_regressor(x, y, forest_spec(LearnerFamily::random_forest_reg, 100, 17));
    const Vector pred = predict(model, x);
    const double mse = (pred - signal).squaredNorm() / n;
    REQUIRE(mse < 0.05);
}

TEST_CASE("probability forest separates a clean two-class problem") {
    const int n = 120;
    Matrix x(n, 1);
    IntVector labels(n);
    Rng rng(5);
    for (int i = 0; i < n; ++i) {
        labels(i) = i % 2;
        x(i, 0) = (labels(i) == 1 ? 3.0 : -3.0) + 0.1 * rng.normal();
    }
    const ProbModel model =
        fit_classifier(x, labels, 2, forest_spec(LearnerFamily::random_forest_prob, 50, 21));
    const Matrix proba = predict_proba(model, x);
    int correct = 0;
    for (int i = 0; i < n; ++i)
        correct += (proba(i, 1) > proba(i, 0) ? 1 : 0) == labels(i) ? 1 : 0;
    REQUIRE(correct == n);
}

TEST_CASE("single-class input names the class count") {
    Matrix x(20, 1);
    IntVector labels = IntVector::Zero(20);
    Rng rng(6);
    for (int i = 0; i < 20; ++i) x(i, 0) = rng.normal();
    LearnerSpec spec;
    spec.family = LearnerFamily::logistic;
    try {
        fit_classifier(x, labels, 2, spec);
        FAIL("expected an estimation error");
    } catch (const EstimationError& e) {
        REQUIRE(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("logistic on coin-flip labels stays near one half") {
    const int n = 2000;
    Matrix x(n, 2);
    IntVector labels(n);
    Rng rng(7);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        labels(i) = i % 2;  // balanced and independent of x
    }
    LearnerSpec spec;
    spec.family = LearnerFamily::logistic;
    const ProbModel model = fit_classifier(x, labels, 2, spec);
    const Matrix proba = predict_proba(model, x);
    for (int i = 0; i < n; ++i) {
        REQUIRE(proba(i, 1) > 0.45);
        REQUIRE(proba(i, 1) < 0.55);
    }
}

TEST_CASE("probability rows sum to one before clipping and stay clipped after") {
    const int n = 300;
    Matrix x(n, 2);
    IntVector labels(n);
    Rng rng(8);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        labels(i) = static_cast<int>(rng.uniform_int(3));
    }
    LearnerSpec spec;
    spec.family = LearnerFamily::logistic;
    spec.clip = 1e-4;
    const ProbModel model = fit_classifier(x, labels, 3, spec);

    const Matrix raw = model.predict_proba_raw(x);
    for (int i = 0; i < n; ++i) REQUIRE(std::abs(raw.row(i).sum() - 1.0) < 1e-9);

    const Matrix clipped = predict_proba(model, x);
    REQUIRE(clipped.minCoeff() >= 1e-4);
    REQUIRE(clipped.maxCoeff() <= 1.0 - 1e-4);
}

TEST_CASE("a class absent from training still gets a clipped column") {
    const int n = 100;
    Matrix x(n, 1);
    IntVector labels(n);
    Rng rng(9);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        labels(i) = (i % 2 == 0) ? 0 : 2;  // class 1 never observed
    }
    LearnerSpec spec;
    spec.family = LearnerFamily::logistic;
    const ProbModel model = fit_classifier(x, labels, 3, spec);
    REQUIRE(model.absent_classes() == std::vector<int>{1});
    const Matrix proba = predict_proba(model, x);
    for (int i = 0; i < n; ++i) REQUIRE(proba(i, 1) == spec.clip);
}

TEST_CASE("identical data, spec and seed give bit-identical forests") {
    const int n = 150;
    Matrix x(n, 3);
    Vector y(n);
    Rng rng(10);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
        y(i) = x(i, 0) * x(i, 1) + rng.normal();
    }
    const LearnerSpec spec = forest_spec(LearnerFamily::random_forest_reg, 30, 99);
    const Vector a = predict(fit_regressor(x, y, spec), x);
    const Vector b = predict(fit_regressor(x, y, spec), x);
    REQUIRE(a == b);

    // Parallel tree fitting must not change the result.
    LearnerSpec par = spec;
    par.n_workers = 4;
    const Vector c = predict(fit_regressor(x, y, par), x);
    REQUIRE(a == c);
}

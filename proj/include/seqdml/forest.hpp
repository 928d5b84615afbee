#pragma once

#include "seqdml/common.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

namespace seqdml {

namespace detail {

struct ForestParams {
    int n_trees = 500;
    int max_depth = -1;  // -1 = unbounded
    int min_leaf = 5;
    int features_per_split = 0;  // 0 = family default
    bool bootstrap = true;
    std::uint64_t seed = 0;
    int n_workers = 1;
};

// One CART tree used for both regression (n_classes == 0, leaf payload is a
// mean) and classification (leaf payload is a class distribution).
class Tree {
  public:
    void fit(const Matrix& x, const Vector& y_reg, const IntVector& y_cls, int n_classes,
             const ForestParams& params, Rng& rng) {
        n_classes_ = n_classes;
        const int n = static_cast<int>(x.rows());
        std::vector<int> samples;
        samples.reserve(static_cast<std::size_t>(n));
        if (params.bootstrap) {
            for (int i = 0; i < n; ++i)
                samples.push_back(static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n))));
        } else {
            samples.resize(static_cast<std::size_t>(n));
            std::iota(samples.begin(), samples.end(), 0);
        }
        const int mtry = params.features_per_split > 0
                             ? std::min<int>(params.features_per_split, static_cast<int>(x.cols()))
                             : default_mtry(static_cast<int>(x.cols()));
        build(x, y_reg, y_cls, samples, 0, params, mtry, rng);
    }

    double predict_value(const Matrix& x, Eigen::Index row) const {
        return leaf_values_[static_cast<std::size_t>(find_leaf(x, row))];
    }

    void accumulate_dist(const Matrix& x, Eigen::Index row, Vector& out) const {
        const int leaf = find_leaf(x, row);
        for (int c = 0; c < n_classes_; ++c)
            out(c) += leaf_dist_[static_cast<std::size_t>(leaf * n_classes_ + c)];
    }

  private:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int payload = -1;
    };

    static int default_mtry(int p) { return std::max(1, static_cast<int>(std::sqrt(static_cast<double>(p)))); }

    int find_leaf(const Matrix& x, Eigen::Index row) const {
        int node = 0;
        while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
            const Node& nd = nodes_[static_cast<std::size_t>(node)];
            node = x(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        return nodes_[static_cast<std::size_t>(node)].payload;
    }

    int make_leaf(const Vector& y_reg, const IntVector& y_cls, const std::vector<int>& samples) {
        Node leaf;
        if (n_classes_ == 0) {
            double sum = 0.0;
            for (int i : samples) sum += y_reg(i);
            leaf.payload = static_cast<int>(leaf_values_.size());
            leaf_values_.push_back(sum / static_cast<double>(samples.size()));
        } else {
            std::vector<double> dist(static_cast<std::size_t>(n_classes_), 0.0);
            for (int i : samples) dist[static_cast<std::size_t>(y_cls(i))] += 1.0;
            for (auto& d : dist) d /= static_cast<double>(samples.size());
            leaf.payload = static_cast<int>(leaf_dist_.size() / static_cast<std::size_t>(n_classes_));
            leaf_dist_.insert(leaf_dist_.end(), dist.begin(), dist.end());
        }
        nodes_.push_back(leaf);
        return static_cast<int>(nodes_.size()) - 1;
    }

    // Returns the node index. Depth-first construction keeps the layout a
    // pure function of (data, params, rng stream).
    int build(const Matrix& x, const Vector& y_reg, const IntVector& y_cls,
              const std::vector<int>& samples, int depth, const ForestParams& params, int mtry,
              Rng& rng) {
        const int m = static_cast<int>(samples.size());
        bool pure = true;
        if (n_classes_ == 0) {
            for (int i = 1; i < m && pure; ++i)
                pure = y_reg(samples[static_cast<std::size_t>(i)]) == y_reg(samples[0]);
        } else {
            for (int i = 1; i < m && pure; ++i)
                pure = y_cls(samples[static_cast<std::size_t>(i)]) == y_cls(samples[0]);
        }
        if (pure || m < 2 * params.min_leaf || (params.max_depth >= 0 && depth >= params.max_depth))
            return make_leaf(y_reg, y_cls, samples);

        // Feature subset: partial Fisher-Yates over the feature indices.
        const int p = static_cast<int>(x.cols());
        std::vector<int> features(static_cast<std::size_t>(p));
        std::iota(features.begin(), features.end(), 0);
        for (int j = 0; j < mtry; ++j) {
            const int k = j + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(p - j)));
            std::swap(features[static_cast<std::size_t>(j)], features[static_cast<std::size_t>(k)]);
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_score = -1.0;  // higher is better
        std::vector<std::pair<double, int>> order(static_cast<std::size_t>(m));

        for (int j = 0; j < mtry; ++j) {
            const int f = features[static_cast<std::size_t>(j)];
            for (int i = 0; i < m; ++i) {
                const int s = samples[static_cast<std::size_t>(i)];
                order[static_cast<std::size_t>(i)] = {x(s, f), s};
            }
            std::sort(order.begin(), order.end());

            if (n_classes_ == 0) {
                double total = 0.0;
                for (const auto& [v, s] : order) total += y_reg(s);
                double left_sum = 0.0;
                for (int i = 0; i + 1 < m; ++i) {
                    left_sum += y_reg(order[static_cast<std::size_t>(i)].second);
                    const int n_left = i + 1;
                    const int n_right = m - n_left;
                    if (n_left < params.min_leaf || n_right < params.min_leaf) continue;
                    if (order[static_cast<std::size_t>(i)].first ==
                        order[static_cast<std::size_t>(i + 1)].first)
                        continue;
                    const double right_sum = total - left_sum;
                    const double score = left_sum * left_sum / n_left + right_sum * right_sum / n_right;
                    if (score > best_score) {
                        best_score = score;
                        best_feature = f;
                        best_threshold = 0.5 * (order[static_cast<std::size_t>(i)].first +
                                                order[static_cast<std::size_t>(i + 1)].first);
                    }
                }
            } else {
                std::vector<double> left_counts(static_cast<std::size_t>(n_classes_), 0.0);
                std::vector<double> total_counts(static_cast<std::size_t>(n_classes_), 0.0);
                for (const auto& [v, s] : order) total_counts[static_cast<std::size_t>(y_cls(s))] += 1.0;
                for (int i = 0; i + 1 < m; ++i) {
                    left_counts[static_cast<std::size_t>(
                        y_cls(order[static_cast<std::size_t>(i)].second))] += 1.0;
                    const int n_left = i + 1;
                    const int n_right = m - n_left;
                    if (n_left < params.min_leaf || n_right < params.min_leaf) continue;
                    if (order[static_cast<std::size_t>(i)].first ==
                        order[static_cast<std::size_t>(i + 1)].first)
                        continue;
                    // Gini gain up to constants: sum of squared counts over size.
                    double left_sq = 0.0, right_sq = 0.0;
                    for (int c = 0; c < n_classes_; ++c) {
                        const double lc = left_counts[static_cast<std::size_t>(c)];
                        const double rc = total_counts[static_cast<std::size_t>(c)] - lc;
                        left_sq += lc * lc;
                        right_sq += rc * rc;
                    }
                    const double score = left_sq / n_left + right_sq / n_right;
                    if (score > best_score) {
                        best_score = score;
                        best_feature = f;
                        best_threshold = 0.5 * (order[static_cast<std::size_t>(i)].first +
                                                order[static_cast<std::size_t>(i + 1)].first);
                    }
                }
            }
        }

        if (best_feature < 0) return make_leaf(y_reg, y_cls, samples);

        std::vector<int> left, right;
        for (int s : samples)
            (x(s, best_feature) <= best_threshold ? left : right).push_back(s);
        if (static_cast<int>(left.size()) < params.min_leaf ||
            static_cast<int>(right.size()) < params.min_leaf)
            return make_leaf(y_reg, y_cls, samples);

        const int self = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        nodes_[static_cast<std::size_t>(self)].feature = best_feature;
        nodes_[static_cast<std::size_t>(self)].threshold = best_threshold;
        const int left_idx = build(x, y_reg, y_cls, left, depth + 1, params, mtry, rng);
        const int right_idx = build(x, y_reg, y_cls, right, depth + 1, params, mtry, rng);
        nodes_[static_cast<std::size_t>(self)].left = left_idx;
        nodes_[static_cast<std::size_t>(self)].right = right_idx;
        return self;
    }

    int n_classes_ = 0;
    std::vector<Node> nodes_;
    std::vector<double> leaf_values_;
    std::vector<double> leaf_dist_;
};

}  // namespace detail

// Bagged regression forest; prediction is the mean of leaf means.
class ForestRegModel {
  public:
    static ForestRegModel fit(const Matrix& features, const Vector& targets,
                              const detail::ForestParams& params) {
        if (features.rows() != targets.size())
            throw ValidationError("forest: feature rows and target length differ");
        if (params.n_trees < 1 || params.min_leaf < 1)
            throw ConfigError("forest: n_trees and min_leaf must be at least 1");
        ForestRegModel model;
        model.trees_.resize(static_cast<std::size_t>(params.n_trees));
        IntVector no_cls;
        // Per-tree seeds keep the fit independent of the parallel schedule.
        parallel_for(params.n_trees, params.n_workers, [&](int t) {
            Rng rng(derive_seed(params.seed, 0x7EE5, static_cast<std::uint64_t>(t)));
            model.trees_[static_cast<std::size_t>(t)].fit(features, targets, no_cls, 0, params, rng);
        });
        return model;
    }

    Vector predict(const Matrix& features) const {
        Vector out = Vector::Zero(features.rows());
        for (const auto& tree : trees_)
            for (Eigen::Index i = 0; i < features.rows(); ++i) out(i) += tree.predict_value(features, i);
        return out / static_cast<double>(trees_.size());
    }

  private:
    std::vector<detail::Tree> trees_;
};

// Bagged classification forest; probabilities are averaged leaf class shares.
class ForestProbModel {
  public:
    static ForestProbModel fit(const Matrix& features, const IntVector& labels, int n_classes,
                               const detail::ForestParams& params) {
        if (features.rows() != labels.size())
            throw ValidationError("forest: feature rows and label length differ");
        if (params.n_trees < 1 || params.min_leaf < 1)
            throw ConfigError("forest: n_trees and min_leaf must be at least 1");
        ForestProbModel model;
        model.n_classes_ = n_classes;
        std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
        for (Eigen::Index i = 0; i < labels.size(); ++i) ++counts[static_cast<std::size_t>(labels(i))];
        for (int c = 0; c < n_classes; ++c)
            if (counts[static_cast<std::size_t>(c)] == 0) model.absent_classes_.push_back(c);

        model.trees_.resize(static_cast<std::size_t>(params.n_trees));
        Vector no_reg;
        parallel_for(params.n_trees, params.n_workers, [&](int t) {
            Rng rng(derive_seed(params.seed, 0x7EE5, static_cast<std::uint64_t>(t)));
            model.trees_[static_cast<std::size_t>(t)].fit(features, no_reg, labels, n_classes, params,
                                                          rng);
        });
        return model;
    }

    Matrix predict_proba(const Matrix& features) const {
        Matrix proba = Matrix::Zero(features.rows(), n_classes_);
        Vector row(n_classes_);
        for (Eigen::Index i = 0; i < features.rows(); ++i) {
            row.setZero();
            for (const auto& tree : trees_) tree.accumulate_dist(features, i, row);
            proba.row(i) = row / static_cast<double>(trees_.size());
        }
        return proba;
    }

    const std::vector<int>& absent_classes() const { return absent_classes_; }

  private:
    int n_classes_ = 0;
    std::vector<detail::Tree> trees_;
    std::vector<int> absent_classes_;
};

}  // namespace seqdml

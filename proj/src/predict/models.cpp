/*
 * Copyright 2026 The randalloc Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "randalloc/predict/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "randalloc/core/errors.hpp"
#include "randalloc/core/log.hpp"

namespace randalloc::predict {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double linear(std::span<const double> params, std::span<const double> x) {
  const std::size_t d = x.size();
  double z = params[d];
  for (std::size_t j = 0; j < d; ++j) z += params[j] * x[j];
  return z;
}

void check_shapes(const Matrix& x, std::span<const std::uint8_t> y) {
  if (x.rows() != y.size()) {
    throw StructuralError(
        fmt::format("{} feature rows but {} labels", x.rows(), y.size()));
  }
}

void require_both_classes(std::span<const std::uint8_t> y,
                          std::span<const std::size_t> rows) {
  bool zero = false;
  bool one = false;
  for (std::size_t r : rows) {
    (y[r] ? one : zero) = true;
    if (zero && one) return;
  }
  throw TrainingError("training fold holds a single class");
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

double gini(double positives, double count) {
  if (count <= 0.0) return 0.0;
  const double p = positives / count;
  return 2.0 * p * (1.0 - p);
}

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;
};

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogisticRegression:
      return "logistic_regression";
    case ModelKind::kDecisionTree:
      return "decision_tree";
    case ModelKind::kRandomForest:
      return "random_forest";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "lr" || text == "logistic_regression") {
    return ModelKind::kLogisticRegression;
  }
  if (text == "tree" || text == "decision_tree") return ModelKind::kDecisionTree;
  if (text == "rf" || text == "random_forest") return ModelKind::kRandomForest;
  throw ConfigError(fmt::format("unknown model '{}'", text));
}

ModelSpec ModelSpec::defaults(ModelKind kind) {
  ModelSpec spec;
  spec.kind = kind;
  return spec;
}

std::string ModelSpec::describe() const {
  switch (kind) {
    case ModelKind::kLogisticRegression:
      return fmt::format("logistic_regression(lr={},tol={},max_iter={},l2={})",
                         logistic.learning_rate, logistic.tolerance,
                         logistic.max_iterations, logistic.l2);
    case ModelKind::kDecisionTree:
      return fmt::format("decision_tree(depth={},min_leaf={},max_features={})",
                         tree.max_depth, tree.min_leaf, tree.max_features);
    case ModelKind::kRandomForest:
      return fmt::format("random_forest(trees={},depth={},min_leaf={},max_features={})",
                         forest.trees, forest.tree.max_depth, forest.tree.min_leaf,
                         forest.max_features == 0 ? std::string("sqrt")
                                                  : std::to_string(forest.max_features));
  }
  return "unknown";
}

ClaimProfile PredictedClaims::profile(std::span<const IndividualId> ids) const {
  return ClaimProfile(scores, std::vector<IndividualId>(ids.begin(), ids.end()));
}

PredictedClaims predict(const Classifier& model, const Matrix& rows) {
  PredictedClaims out;
  out.model = model.describe();
  out.scores.resize(rows.rows());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const double s = model.predict(rows.row(r));
    if (!std::isfinite(s)) throw TrainingError("model produced a non-finite score");
    out.scores[r] = std::clamp(s, 0.0, 1.0);
  }
  return out;
}

std::unique_ptr<Classifier> train(const ModelSpec& spec, const Matrix& x,
                                  std::span<const std::uint8_t> y,
                                  RandomSource& rng) {
  check_shapes(x, y);
  switch (spec.kind) {
    case ModelKind::kLogisticRegression:
      return std::make_unique<LogisticRegression>(
          LogisticRegression::fit(x, y, spec.logistic));
    case ModelKind::kDecisionTree:
      require_both_classes(y, all_rows(x.rows()));
      return std::make_unique<DecisionTree>(
          DecisionTree::fit(x, y, all_rows(x.rows()), spec.tree, rng));
    case ModelKind::kRandomForest:
      return std::make_unique<RandomForest>(RandomForest::fit(x, y, spec.forest, rng));
  }
  throw ConfigError("unknown model kind");
}

// ---------------------------------------------------------------------------
// Logistic regression

double LogisticRegression::loss(std::span<const double> params, const Matrix& x,
                                std::span<const std::uint8_t> y, double l2) {
  check_shapes(x, y);
  if (params.size() != x.cols() + 1) throw StructuralError("parameter size mismatch");
  double total = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double z = linear(params, x.row(r));
    total += softplus(z) - (y[r] ? z : 0.0);
  }
  double penalty = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) penalty += params[j] * params[j];
  return total / static_cast<double>(x.rows()) + 0.5 * l2 * penalty;
}

std::vector<double> LogisticRegression::gradient(std::span<const double> params,
                                                 const Matrix& x,
                                                 std::span<const std::uint8_t> y,
                                                 double l2) {
  check_shapes(x, y);
  if (params.size() != x.cols() + 1) throw StructuralError("parameter size mismatch");
  const std::size_t d = x.cols();
  std::vector<double> g(d + 1, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    const double residual = sigmoid(linear(params, row)) - (y[r] ? 1.0 : 0.0);
    for (std::size_t j = 0; j < d; ++j) g[j] += residual * row[j];
    g[d] += residual;
  }
  const double inv = 1.0 / static_cast<double>(x.rows());
  for (std::size_t j = 0; j < d; ++j) g[j] = g[j] * inv + l2 * params[j];
  g[d] *= inv;
  return g;
}

LogisticRegression LogisticRegression::fit(const Matrix& x,
                                           std::span<const std::uint8_t> y,
                                           const LogisticRegressionParams& params) {
  check_shapes(x, y);
  require_both_classes(y, all_rows(y.size()));
  if (!(params.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  std::vector<double> w(x.cols() + 1, 0.0);
  std::size_t iter = 0;
  bool converged = false;
  for (; iter < params.max_iterations; ++iter) {
    const auto g = gradient(w, x, y, params.l2);
    double largest = 0.0;
    for (double v : g) largest = std::max(largest, std::abs(v));
    if (largest < params.tolerance) {
      converged = true;
      break;
    }
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= params.learning_rate * g[j];
  }
  if (!converged) {
    logger().debug("logistic regression stopped at {} iterations before tolerance",
                   iter);
  }
  LogisticRegression model(std::move(w));
  model.iterations_ = iter;
  model.converged_ = converged;
  return model;
}

double LogisticRegression::predict(std::span<const double> x) const {
  if (x.size() + 1 != params_.size()) throw StructuralError("feature size mismatch");
  return sigmoid(linear(params_, x));
}

std::string LogisticRegression::describe() const {
  return fmt::format("logistic_regression(iterations={},converged={})", iterations_,
                     converged_);
}

// ---------------------------------------------------------------------------
// CART

DecisionTree DecisionTree::fit(const Matrix& x, std::span<const std::uint8_t> y,
                               std::span<const std::size_t> rows,
                               const TreeParams& params, RandomSource& rng) {
  check_shapes(x, y);
  if (rows.empty()) throw TrainingError("cannot grow a tree on no rows");
  if (params.min_leaf == 0) throw ConfigError("min_leaf must be >= 1");
  const std::size_t d = x.cols();
  const std::size_t tried =
      params.max_features == 0 ? d : std::min(params.max_features, d);

  DecisionTree tree;
  tree.params_ = params;

  std::vector<std::size_t> index(rows.begin(), rows.end());
  std::vector<std::size_t> features(d);
  std::iota(features.begin(), features.end(), 0);
  std::vector<std::pair<double, std::uint8_t>> sorted;

  struct Pending {
    std::size_t node;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Pending> stack;
  tree.nodes_.push_back({});
  stack.push_back({0, 0, index.size()});

  while (!stack.empty()) {
    const Pending job = stack.back();
    stack.pop_back();
    const std::size_t count = job.end - job.begin;
    double positives = 0.0;
    for (std::size_t i = job.begin; i < job.end; ++i) positives += y[index[i]];
    const std::size_t depth = tree.nodes_[job.node].depth;
    tree.nodes_[job.node].value = positives / static_cast<double>(count);

    const double parent = gini(positives, static_cast<double>(count)) *
                          static_cast<double>(count);
    if (depth >= params.max_depth || count < 2 * params.min_leaf || parent <= 0.0) {
      continue;
    }

    if (tried < d) {
      for (std::size_t i = 0; i < tried; ++i) {
        std::swap(features[i], features[i + rng.below(d - i)]);
      }
    }

    SplitChoice best;
    best.impurity = parent - 1e-12;
    for (std::size_t f = 0; f < tried; ++f) {
      const std::size_t feature = features[f];
      sorted.clear();
      for (std::size_t i = job.begin; i < job.end; ++i) {
        sorted.emplace_back(x(index[i], feature), y[index[i]]);
      }
      std::sort(sorted.begin(), sorted.end());
      double left_pos = 0.0;
      for (std::size_t i = 1; i < count; ++i) {
        left_pos += sorted[i - 1].second;
        if (i < params.min_leaf || count - i < params.min_leaf) continue;
        if (sorted[i - 1].first == sorted[i].first) continue;
        const double nl = static_cast<double>(i);
        const double nr = static_cast<double>(count - i);
        const double impurity =
            gini(left_pos, nl) * nl + gini(positives - left_pos, nr) * nr;
        if (impurity < best.impurity) {
          const double a = sorted[i - 1].first;
          const double b = sorted[i].first;
          double threshold = a + (b - a) / 2.0;
          if (!(threshold < b)) threshold = a;
          best = {true, feature, threshold, impurity};
        }
      }
    }
    if (!best.found) continue;

    const auto mid = std::partition(
        index.begin() + static_cast<std::ptrdiff_t>(job.begin),
        index.begin() + static_cast<std::ptrdiff_t>(job.end),
        [&](std::size_t r) { return x(r, best.feature) <= best.threshold; });
    const std::size_t split = static_cast<std::size_t>(mid - index.begin());

    const auto left = static_cast<std::int32_t>(tree.nodes_.size());
    tree.nodes_.push_back({});
    tree.nodes_.push_back({});
    tree.nodes_[left].depth = depth + 1;
    tree.nodes_[left + 1].depth = depth + 1;
    Node& node = tree.nodes_[job.node];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = left + 1;
    stack.push_back({static_cast<std::size_t>(left + 1), split, job.end});
    stack.push_back({static_cast<std::size_t>(left), job.begin, split});
  }
  return tree;
}

double DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].leaf()) {
    const Node& n = nodes_[i];
    i = static_cast<std::size_t>(x[n.feature] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].value;
}

std::size_t DecisionTree::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::size_t DecisionTree::leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf(); }));
}

std::string DecisionTree::describe() const {
  return fmt::format("decision_tree(depth={},leaves={},min_leaf={})", depth(),
                     leaves(), params_.min_leaf);
}

// ---------------------------------------------------------------------------
// Random forest

RandomForest RandomForest::fit(const Matrix& x, std::span<const std::uint8_t> y,
                               const ForestParams& params, RandomSource& rng) {
  check_shapes(x, y);
  const std::size_t n = x.rows();
  require_both_classes(y, all_rows(n));
  if (params.trees == 0) throw ConfigError("forest needs at least one tree");
  TreeParams tree_params = params.tree;
  tree_params.max_features =
      params.max_features != 0
          ? params.max_features
          : std::max<std::size_t>(
                1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols()))));

  RandomForest forest;
  forest.params_ = params;
  forest.params_.max_features = tree_params.max_features;
  std::vector<std::size_t> sample(n);
  for (std::size_t t = 0; t < params.trees; ++t) {
    RandomSource tree_rng = rng.derive(t);
    for (auto& r : sample) r = tree_rng.below(n);
    forest.trees_.push_back(DecisionTree::fit(x, y, sample, tree_params, tree_rng));
  }
  return forest;
}

double RandomForest::predict(std::span<const double> x) const {
  double total = 0.0;
  for (const auto& t : trees_) total += t.predict(x);
  return total / static_cast<double>(trees_.size());
}

std::string RandomForest::describe() const {
  return fmt::format("random_forest(trees={},max_features={},depth={},min_leaf={})",
                     trees_.size(), params_.max_features, params_.tree.max_depth,
                     params_.tree.min_leaf);
}

}  // namespace randalloc::predict

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

// Probability classifiers: logistic regression, CART trees, random forests.

#ifndef RANDALLOC_PREDICT_MODELS_HPP_
#define RANDALLOC_PREDICT_MODELS_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "randalloc/core/random.hpp"
#include "randalloc/core/types.hpp"
#include "randalloc/predict/dataset.hpp"

namespace randalloc::predict {

enum class ModelKind { kLogisticRegression, kDecisionTree, kRandomForest };

std::string_view to_string(ModelKind kind);
// "lr"/"logistic_regression", "tree"/"decision_tree", "rf"/"random_forest".
ModelKind parse_model_kind(std::string_view text);

struct LogisticRegressionParams {
  double learning_rate = 0.1;
  // Stops once the largest gradient component is below this.
  double tolerance = 1e-6;
  std::size_t max_iterations = 5000;
  double l2 = 0.0;
};

struct TreeParams {
  std::size_t max_depth = 8;
  std::size_t min_leaf = 5;
  // Features tried per split; 0 = all.
  std::size_t max_features = 0;
};

struct ForestParams {
  std::size_t trees = 25;
  TreeParams tree;
  // 0 = floor(sqrt(d)), at least 1.
  std::size_t max_features = 0;
};

struct ModelSpec {
  ModelKind kind = ModelKind::kLogisticRegression;
  LogisticRegressionParams logistic;
  TreeParams tree;
  ForestParams forest;

  static ModelSpec defaults(ModelKind kind);
  std::string describe() const;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  // Estimated P(label = 1 | x), in [0, 1].
  virtual double predict(std::span<const double> x) const = 0;
  virtual std::string describe() const = 0;
};

struct PredictedClaims {
  std::vector<double> scores;
  std::string model;

  ClaimProfile profile(std::span<const IndividualId> ids) const;
};

PredictedClaims predict(const Classifier& model, const Matrix& rows);

// Throws TrainingError when the labels hold a single class. `rng` is only
// read by randomized learners (forests, trees with feature subsampling).
std::unique_ptr<Classifier> train(const ModelSpec& spec, const Matrix& x,
                                  std::span<const std::uint8_t> y,
                                  RandomSource& rng);

class LogisticRegression final : public Classifier {
 public:
  // Batch gradient descent on mean log loss (+ l2/2 |w|^2, intercept free).
  static LogisticRegression fit(const Matrix& x, std::span<const std::uint8_t> y,
                                const LogisticRegressionParams& params);

  // Parameters are [w_1..w_d, b].
  static double loss(std::span<const double> params, const Matrix& x,
                     std::span<const std::uint8_t> y, double l2);
  static std::vector<double> gradient(std::span<const double> params,
                                      const Matrix& x,
                                      std::span<const std::uint8_t> y, double l2);

  explicit LogisticRegression(std::vector<double> params)
      : params_(std::move(params)) {}

  double predict(std::span<const double> x) const override;
  std::string describe() const override;

  std::span<const double> params() const { return params_; }
  std::size_t iterations() const { return iterations_; }
  bool converged() const { return converged_; }

 private:
  std::vector<double> params_;
  std::size_t iterations_ = 0;
  bool converged_ = false;
};

class DecisionTree final : public Classifier {
 public:
  // CART with Gini impurity; leaves score the positive fraction.
  static DecisionTree fit(const Matrix& x, std::span<const std::uint8_t> y,
                          std::span<const std::size_t> rows,
                          const TreeParams& params, RandomSource& rng);

  double predict(std::span<const double> x) const override;
  std::string describe() const override;

  std::size_t depth() const;
  std::size_t leaves() const;

 private:
  struct Node {
    // Internal nodes: go left when x[feature] <= threshold.
    std::size_t feature = 0;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
    std::size_t depth = 0;
    bool leaf() const { return left < 0; }
  };

  std::vector<Node> nodes_;
  TreeParams params_;
};

class RandomForest final : public Classifier {
 public:
  // Bagged trees (bootstrap rows) with per-split feature subsampling; the
  // score is the mean of the tree leaf fractions.
  static RandomForest fit(const Matrix& x, std::span<const std::uint8_t> y,
                          const ForestParams& params, RandomSource& rng);

  double predict(std::span<const double> x) const override;
  std::string describe() const override;

  std::size_t size() const { return trees_.size(); }

 private:
  std::vector<DecisionTree> trees_;
  ForestParams params_;
};

}  // namespace randalloc::predict

#endif  // RANDALLOC_PREDICT_MODELS_HPP_

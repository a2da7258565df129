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

// Repeated train/test evaluation of the uncertainty-aware mechanisms.
//
// Repetition r splits the data with make_fold(ratio, r, seed), trains the
// main model on the whole training fold, and allocates k = round(rate * n)
// slots over the test fold. The ensemble is trained on subsets of the
// training fold. The conformal scorer holds out a calibration share of the
// training fold and uses the rest as the novelty reference. Lottery draws
// are then repeated `iterations` times. Utility is the realized precision
// of the selection on the test labels.

#ifndef RANDALLOC_UNCERTAIN_ALLOC_PROTOCOL_HPP_
#define RANDALLOC_UNCERTAIN_ALLOC_PROTOCOL_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "randalloc/metrics/metrics.hpp"
#include "randalloc/predict/conformal.hpp"
#include "randalloc/predict/dataset.hpp"
#include "randalloc/predict/ensemble.hpp"
#include "randalloc/predict/models.hpp"
#include "randalloc/uncertain_alloc/mechanisms.hpp"

namespace randalloc::uncertain {

enum class Method { kTopK, kBoundary, kVariance, kOutlier };

std::string_view to_string(Method method);
// "topk", "boundary", "variance", "outlier".
Method parse_method(std::string_view text);

struct ProtocolConfig {
  predict::ModelSpec model;
  double selection_rate = 0.25;
  double train_ratio = 0.8;
  std::size_t repetitions = 5;
  std::size_t iterations = 100;
  std::uint64_t seed = 0;

  // Boundary randomization: k' = round(kprime_rate * k) and
  // n' = round(nprime_rate * n); nprime_rate 0 means n' = k.
  double kprime_rate = 0.5;
  double nprime_rate = 0.0;

  predict::EnsembleOptions ensemble;
  predict::VoteRule vote_rule = predict::VoteRule::kMainThreshold;
  // Retrain the ensemble for every iteration instead of once per repetition.
  bool retrain_ensemble = false;

  predict::ConformalOptions conformal;
  double calibration_fraction = 0.25;
  OutlierMode outlier_mode = OutlierMode::kUnweightedPool;

  // Methods evaluated besides top-k, which is always run as the baseline.
  std::vector<Method> methods{Method::kBoundary, Method::kVariance, Method::kOutlier};
  unsigned threads = 0;

  void validate() const;
};

// Everything trained for one repetition.
struct RepetitionModels {
  std::size_t repetition = 0;
  predict::Fold fold;
  predict::PredictedClaims main;
  ClaimProfile profile;
  std::size_t k = 0;
  std::optional<predict::BootstrapEnsemble> ensemble;
  std::vector<double> votes;
  std::optional<predict::ConformalScorer> conformal;
};

RepetitionModels train_repetition(const predict::TabularDataset& data,
                                  const ProtocolConfig& config,
                                  std::size_t repetition, bool need_ensemble,
                                  bool need_conformal);

// One allocation of `method`; `iteration` keys the lottery stream.
UncertainAllocationReport run_method(Method method, const RepetitionModels& models,
                                     const ProtocolConfig& config,
                                     std::size_t iteration, std::uint64_t draw = 0);

struct Mean {
  double mean = 0.0;
  double std_error = 0.0;
};

struct MethodSummary {
  Method method = Method::kTopK;
  Mean kprime_rate;
  Mean nprime_rate;
  Mean utility;
  // Partial lottery at the same realized rates, same repetition/iteration.
  Mean utility_boundary_matched;
  Mean utility_topk;
  // Present when the dataset carries generator-known probabilities.
  std::optional<Mean> expected_utility;
  std::size_t demoted = 0;
  std::size_t score_filled = 0;

  double utility_loss() const { return utility_topk.mean - utility.mean; }
  double matched_loss() const {
    return utility_topk.mean - utility_boundary_matched.mean;
  }
};

struct RepetitionSummary {
  std::size_t repetition = 0;
  std::size_t pool = 0;
  std::size_t k = 0;
  std::string model;
  double positive_rate = 0.0;
  double topk_utility = 0.0;
  std::size_t flagged = 0;
  double q_hat = 0.0;
  std::size_t reference_size = 0;
  std::size_t calibration_size = 0;
};

struct SelectionFrequency {
  IndividualId id = 0;
  std::size_t draws = 0;
  std::size_t selected = 0;
};

struct PredictionRow {
  std::size_t repetition = 0;
  IndividualId id = 0;
  double score = 0.0;
  std::optional<double> vote_fraction;
  std::optional<double> p_value;
};

struct ProtocolResult {
  ProtocolConfig config;
  std::size_t rows = 0;
  double positive_rate = 0.0;
  std::vector<RepetitionSummary> repetitions;
  // Top-k first, then config.methods in order.
  std::vector<MethodSummary> methods;
  // Per method (same order), ascending id.
  std::vector<std::vector<SelectionFrequency>> frequencies;
  std::vector<PredictionRow> predictions;

  const MethodSummary& summary(Method method) const;
};

ProtocolResult run_protocol(const predict::TabularDataset& data,
                            const ProtocolConfig& config);

// SER against utility for each method: every iteration runs m independent
// allocations (fresh lottery draws, and fresh ensembles when
// config.retrain_ensemble) on the repetition's main model.
struct StudyConfig {
  ProtocolConfig protocol;
  std::size_t m = 3;
  std::vector<double> selection_rates{0.25};
  // Boundary points; n' = k throughout.
  std::vector<double> boundary_kprime_rates{0.1, 0.25, 0.5, 0.75, 0.9};
  // Outlier points.
  std::vector<double> alphas{0.05, 0.1, 0.2, 0.3};

  void validate() const;
};

struct StudyPoint {
  Method method = Method::kTopK;
  std::string label;
  double selection_rate = 0.0;
  double kprime_rate = 0.0;
  double nprime_rate = 0.0;
  double utility = 0.0;
  double utility_delta = 0.0;
  double ser = 0.0;
};

struct StudyResult {
  std::vector<StudyPoint> points;
  // Keyed by "<method>@<selection rate>"; each frontier includes top-k.
  std::map<std::string, std::vector<metrics::FrontierPoint>> frontiers;
};

StudyResult ser_tradeoff_study(const predict::TabularDataset& data,
                               const StudyConfig& config);

}  // namespace randalloc::uncertain

#endif  // RANDALLOC_UNCERTAIN_ALLOC_PROTOCOL_HPP_

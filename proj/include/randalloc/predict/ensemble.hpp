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

// Ensembles of models trained on random subsets of the training fold, and
// the vote fractions derived from them.

#ifndef RANDALLOC_PREDICT_ENSEMBLE_HPP_
#define RANDALLOC_PREDICT_ENSEMBLE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "randalloc/core/random.hpp"
#include "randalloc/predict/dataset.hpp"
#include "randalloc/predict/models.hpp"

namespace randalloc::predict {

enum class SubsetSampling { kWithoutReplacement, kWithReplacement };

std::string_view to_string(SubsetSampling sampling);
// "without_replacement" or "with_replacement".
SubsetSampling parse_sampling(std::string_view text);

// How a member votes for an individual.
enum class VoteRule {
  // Member prediction strictly above the main model's threshold score, the
  // zero-based k-th entry of the main scores in canonical order.
  kMainThreshold,
  // Individual is in the member's own top k.
  kMemberTopK,
};

std::string_view to_string(VoteRule rule);
VoteRule parse_vote_rule(std::string_view text);

struct EnsembleOptions {
  std::size_t members = 11;
  double fraction = 0.5;
  SubsetSampling sampling = SubsetSampling::kWithoutReplacement;
  // Fresh subsets tried per member when a subset holds a single class.
  std::size_t max_retries = 20;
  unsigned threads = 0;

  void validate() const;
};

struct BootstrapEnsemble {
  // members x pool predictions.
  Matrix predictions;
  std::size_t subset_size = 0;

  std::size_t members() const { return predictions.rows(); }
  std::size_t pool_size() const { return predictions.cols(); }
  // Standard deviation of member predictions for every pool row.
  std::vector<double> spread() const;
};

// Member b draws its subset and trains from rng.derive(b), so the ensemble
// is identical for any thread count. Subsets are sorted, so fraction 1
// without replacement reproduces the full-fold model for deterministic
// learners.
BootstrapEnsemble bootstrap_ensemble(const ModelSpec& spec, const Matrix& train_x,
                                     std::span<const std::uint8_t> train_y,
                                     const Matrix& pool,
                                     const EnsembleOptions& options,
                                     const RandomSource& rng);

// Zero-based k-th largest main score (canonical order); -infinity when
// k >= n, so every positive prediction votes.
double vote_threshold(std::span<const double> main_scores, std::size_t k);

// votes / members for every pool row.
std::vector<double> vote_fractions(const BootstrapEnsemble& ensemble,
                                   std::span<const double> main_scores,
                                   std::size_t k, VoteRule rule);

}  // namespace randalloc::predict

#endif  // RANDALLOC_PREDICT_ENSEMBLE_HPP_

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

// Allocation on predicted claims with randomization where the predictions
// are least trustworthy.
//
//   boundary  partial lottery on the main model's scores: the top k - k'
//             are fixed, the next n' share k' weighted slots.
//   variance  ensemble members vote for individuals they place above the
//             main model's cut; unanimous individuals are fixed and the
//             remaining slots go by lottery over partial-vote individuals,
//             weighted by vote fraction.
//   outlier   individuals whose features look novel (conformal p-value at
//             most alpha) lose their deterministic slots; those slots are
//             re-drawn from every flagged individual.
//
// Each mechanism reduces to top-k when its uncertainty signal is empty.

#ifndef RANDALLOC_UNCERTAIN_ALLOC_MECHANISMS_HPP_
#define RANDALLOC_UNCERTAIN_ALLOC_MECHANISMS_HPP_

#include <cstddef>
#include <span>
#include <string_view>

#include "randalloc/core/random.hpp"
#include "randalloc/core/types.hpp"
#include "randalloc/predict/conformal.hpp"
#include "randalloc/predict/ensemble.hpp"

namespace randalloc::uncertain {

struct UncertainAllocationReport {
  AllocationResult allocation;
  std::size_t k = 0;
  std::size_t n = 0;
  // Slots filled by lottery and the size of the lottery pool.
  std::size_t k_prime = 0;
  std::size_t n_prime = 0;
  // Variance: unanimous individuals demoted to keep exactly k winners.
  std::size_t demoted = 0;
  // Variance: slots the pool could not cover, filled by main score.
  std::size_t score_filled = 0;

  double kprime_rate() const;
  double nprime_rate() const;
};

UncertainAllocationReport boundary_randomize(const ClaimProfile& scores,
                                             const LotteryConfig& config,
                                             RandomSource& rng);

// `votes` are vote fractions in [0, 1] from `members` ensemble members.
UncertainAllocationReport variance_randomize(const ClaimProfile& scores,
                                             std::span<const double> votes,
                                             std::size_t members, std::size_t k,
                                             RandomSource& rng);

UncertainAllocationReport variance_randomize(const ClaimProfile& scores,
                                             const predict::BootstrapEnsemble& ensemble,
                                             predict::VoteRule rule, std::size_t k,
                                             RandomSource& rng);

enum class OutlierMode {
  // Uniform lottery over the flagged individuals.
  kUnweightedPool,
  // Score-weighted iterative selection over the flagged individuals.
  kWeightedPool,
};

std::string_view to_string(OutlierMode mode);
// "unweighted" or "weighted".
OutlierMode parse_outlier_mode(std::string_view text);

UncertainAllocationReport outlier_randomize(const ClaimProfile& scores,
                                            std::span<const double> p_values,
                                            double alpha, std::size_t k,
                                            OutlierMode mode, RandomSource& rng);

UncertainAllocationReport outlier_randomize(const ClaimProfile& scores,
                                            const predict::ConformalScorer& scorer,
                                            std::size_t k, OutlierMode mode,
                                            RandomSource& rng);

// Partial lottery with the same randomization rates as `report`: k' slots
// over a pool of n', with n' moved into (k', n - k + k'] when needed. k' = 0
// gives top-k.
LotteryConfig matched_boundary_config(const UncertainAllocationReport& report);

}  // namespace randalloc::uncertain

#endif  // RANDALLOC_UNCERTAIN_ALLOC_MECHANISMS_HPP_

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

// Allocation mechanisms over known claims.
//
// Every lottery here is an iterative weighted selection: one individual is
// drawn per round, without replacement, by inverting the cumulative weight
// of the survivors with a single uniform draw. Weighted lotteries renormalize
// after each removal, so round-t weights are c_i / C_t where C_t is the
// total claim still in the pool.
//
// Zero claims: a weighted round only considers positive claims. When every
// survivor has claim 0 and slots remain, the rest are filled by a uniform
// draw over the survivors and the mechanism descriptor gains
// "+zero_claim_fallback" (unless SelectionOptions disables the fallback, in
// which case ConfigError is thrown).

#ifndef RANDALLOC_LOTTERY_LOTTERY_HPP_
#define RANDALLOC_LOTTERY_LOTTERY_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "randalloc/core/random.hpp"
#include "randalloc/core/types.hpp"

namespace randalloc::lottery {

// Maps the claims of the current survivors to round weights that sum to 1.
// Returning nullopt means "no positive weight available".
using WeightRule = std::function<std::optional<std::vector<double>>(
    std::span<const double> survivor_claims)>;

// w_i = c_i / sum(c). nullopt when every claim is 0.
std::optional<std::vector<double>> bf_weights(
    std::span<const double> survivor_claims);

// w_i = 1 / |survivors|.
std::optional<std::vector<double>> uniform_weights(
    std::span<const double> survivor_claims);

struct SelectionRound {
  SelectionWeights weights;
  IndividualId chosen;
};

struct SelectionTrace {
  std::vector<SelectionRound> rounds;
  // Chosen outright before any lottery round.
  std::vector<IndividualId> deterministic;
  // Canonical-rank slice [pool_begin, pool_end) that entered the lottery.
  std::size_t pool_begin = 0;
  std::size_t pool_end = 0;
  bool zero_claim_fallback = false;

  std::vector<SelectionWeights> weights() const;
};

struct SelectionOptions {
  // Per-round weights cost O(survivors) each; simulations leave this off.
  bool record_trace = false;
  bool zero_claim_fallback = true;
};

struct Selection {
  AllocationResult result;
  SelectionTrace trace;
};

// Reference implementation: calls `rule` on the survivors every round.
// O(k * n); prefer the mechanism-specific entry points below.
Selection iterative_weighted_selection(const ClaimProfile& claims,
                                       std::size_t k, const WeightRule& rule,
                                       RandomSource& rng,
                                       const SelectionOptions& options = {});

// Draws `count` positions from `candidates` without replacement, weights
// proportional to `weights` (aligned with candidates) and renormalized each
// round. Returns positions in draw order. When `trace` is non-null rounds are
// appended to it, numbered from trace->rounds.size() + 1.
std::vector<std::size_t> weighted_draw(
    std::span<const std::size_t> candidates, std::span<const double> weights,
    std::size_t count, RandomSource& rng, const SelectionOptions& options,
    std::span<const IndividualId> ids, SelectionTrace* trace,
    bool* used_fallback = nullptr);

// The k largest claims; ties go to the smaller id.
AllocationResult top_k(const ClaimProfile& claims, std::size_t k);

// Uniform k-subset.
AllocationResult unweighted_lottery(const ClaimProfile& claims, std::size_t k,
                                    RandomSource& rng);

// Weighted lottery with w_i = c_i / C_t over every individual.
Selection bf_lottery(const ClaimProfile& claims, std::size_t k,
                     RandomSource& rng, const SelectionOptions& options = {});

// Top k-k' by canonical order are selected outright; the next n' enter a
// weighted lottery for the remaining k' slots. k' = 0 reproduces top_k.
Selection partial_bf_lottery(const ClaimProfile& claims,
                             const LotteryConfig& config, RandomSource& rng,
                             const SelectionOptions& options = {});

// Same, reusing a precomputed canonical_order(claims).
Selection partial_bf_lottery(const ClaimProfile& claims,
                             const LotteryConfig& config,
                             std::span<const std::size_t> order,
                             RandomSource& rng,
                             const SelectionOptions& options = {});

// Dispatches TopK, Unweighted, BF and PartialBF/DecisionBoundary. Throws
// ConfigError for mechanisms that need predictions.
Selection allocate(const ClaimProfile& claims, const LotteryConfig& config,
                   RandomSource& rng, const SelectionOptions& options = {});

// Builds a result from positions in selection order.
AllocationResult make_result(const ClaimProfile& claims,
                             std::span<const std::size_t> selected,
                             std::uint64_t seed, std::string mechanism);

}  // namespace randalloc::lottery

#endif  // RANDALLOC_LOTTERY_LOTTERY_HPP_

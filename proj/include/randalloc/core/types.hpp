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

// Value types shared by every allocation mechanism.
//
// Individuals are addressed two ways: by *position* (index into the claim
// vector, which is also the index into AllocationResult::outcomes) and by
// *id* (the stable identifier carried by ClaimProfile). Selection orders and
// traces report ids.

#ifndef RANDALLOC_CORE_TYPES_HPP_
#define RANDALLOC_CORE_TYPES_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace randalloc {

using IndividualId = std::uint64_t;

inline constexpr double kWeightSumTolerance = 1e-9;

// Claim strengths in [0, 1] with unique ids.
class ClaimProfile {
 public:
  ClaimProfile() = default;
  // Ids default to 0..n-1.
  explicit ClaimProfile(std::vector<double> claims);
  ClaimProfile(std::vector<double> claims, std::vector<IndividualId> ids);

  std::size_t size() const { return claims_.size(); }
  bool empty() const { return claims_.empty(); }
  std::span<const double> claims() const { return claims_; }
  std::span<const IndividualId> ids() const { return ids_; }
  double claim(std::size_t position) const { return claims_[position]; }
  IndividualId id(std::size_t position) const { return ids_[position]; }

  // Same individuals with new claim values.
  ClaimProfile with_claims(std::vector<double> claims) const;

 private:
  std::vector<double> claims_;
  std::vector<IndividualId> ids_;
};

enum class Mechanism {
  kTopK,
  kUnweighted,
  kBF,
  kPartialBF,
  kVariance,
  kOutlier,
  kDecisionBoundary,
};

std::string_view to_string(Mechanism mechanism);
// Accepts the names produced by to_string plus a few aliases
// ("top_k", "weighted", "partial", "boundary"). Throws ConfigError.
Mechanism parse_mechanism(std::string_view name);

struct LotteryConfig {
  std::size_t k = 1;
  std::size_t n = 1;
  // Resources and pool size of the randomized phase (partial lotteries).
  std::size_t k_prime = 0;
  std::size_t n_prime = 0;
  Mechanism mechanism = Mechanism::kTopK;

  // 1 <= k <= n; for PartialBF / DecisionBoundary additionally
  // k' in (0, k] and n' in (k', n - k + k']. k' = 0 is accepted as the
  // degenerate no-randomization case (n' <= n - k). Throws ConfigError.
  void validate() const;
  std::string describe() const;
};

// Round-t weights over the individuals not yet selected.
class SelectionWeights {
 public:
  // Throws StructuralError on size mismatch, negative entries, or a sum
  // farther than kWeightSumTolerance from 1.
  SelectionWeights(std::size_t round, std::vector<IndividualId> survivors,
                   std::vector<double> weights);

  std::size_t round() const { return round_; }
  std::span<const IndividualId> survivors() const { return survivors_; }
  std::span<const double> weights() const { return weights_; }

 private:
  std::size_t round_;
  std::vector<IndividualId> survivors_;
  std::vector<double> weights_;
};

struct AllocationResult {
  // Indexed by position; 1 = receives the resource.
  std::vector<std::uint8_t> outcomes;
  // Ids in the order they were selected.
  std::vector<IndividualId> selected_order;
  std::uint64_t seed = 0;
  std::string mechanism;

  std::size_t selected_count() const;
  // Exactly k ones, k unique ids in selected_order. Throws StructuralError.
  void validate(std::size_t k) const;
};

struct UtilityGroundTruth {
  std::optional<std::vector<std::uint8_t>> realized;
  std::optional<std::vector<double>> probabilities;

  void validate(std::size_t n) const;
};

}  // namespace randalloc

#endif  // RANDALLOC_CORE_TYPES_HPP_

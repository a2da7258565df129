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

#include "randalloc/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>

#include "randalloc/core/errors.hpp"

namespace randalloc {
namespace {

void check_claims(std::span<const double> claims) {
  for (std::size_t i = 0; i < claims.size(); ++i) {
    const double c = claims[i];
    if (!(c >= 0.0 && c <= 1.0)) {
      throw ConfigError(
          fmt::format("claim at position {} is {}, outside [0, 1]", i, c));
    }
  }
}

}  // namespace

ClaimProfile::ClaimProfile(std::vector<double> claims)
    : claims_(std::move(claims)), ids_(claims_.size()) {
  check_claims(claims_);
  std::iota(ids_.begin(), ids_.end(), IndividualId{0});
}

ClaimProfile::ClaimProfile(std::vector<double> claims,
                           std::vector<IndividualId> ids)
    : claims_(std::move(claims)), ids_(std::move(ids)) {
  if (claims_.size() != ids_.size()) {
    throw StructuralError(fmt::format("{} claims but {} ids", claims_.size(),
                                      ids_.size()));
  }
  check_claims(claims_);
  std::unordered_set<IndividualId> seen;
  seen.reserve(ids_.size());
  for (IndividualId id : ids_) {
    if (!seen.insert(id).second) {
      throw StructuralError(fmt::format("duplicate individual id {}", id));
    }
  }
}

ClaimProfile ClaimProfile::with_claims(std::vector<double> claims) const {
  if (claims.size() != claims_.size()) {
    throw StructuralError("with_claims: size mismatch");
  }
  check_claims(claims);
  ClaimProfile out;
  out.claims_ = std::move(claims);
  out.ids_ = ids_;
  return out;
}

std::string_view to_string(Mechanism mechanism) {
  switch (mechanism) {
    case Mechanism::kTopK:
      return "topk";
    case Mechanism::kUnweighted:
      return "unweighted";
    case Mechanism::kBF:
      return "bf";
    case Mechanism::kPartialBF:
      return "partial_bf";
    case Mechanism::kVariance:
      return "variance";
    case Mechanism::kOutlier:
      return "outlier";
    case Mechanism::kDecisionBoundary:
      return "boundary";
  }
  return "unknown";
}

Mechanism parse_mechanism(std::string_view name) {
  if (name == "topk" || name == "top_k") return Mechanism::kTopK;
  if (name == "unweighted" || name == "uniform") return Mechanism::kUnweighted;
  if (name == "bf" || name == "weighted") return Mechanism::kBF;
  if (name == "partial_bf" || name == "partial") return Mechanism::kPartialBF;
  if (name == "variance") return Mechanism::kVariance;
  if (name == "outlier" || name == "outliers") return Mechanism::kOutlier;
  if (name == "boundary" || name == "decision_boundary") {
    return Mechanism::kDecisionBoundary;
  }
  throw ConfigError(fmt::format("unknown mechanism '{}'", name));
}

void LotteryConfig::validate() const {
  if (n == 0 || k == 0 || k > n) {
    throw ConfigError(fmt::format("need 1 <= k <= n, got k={} n={}", k, n));
  }
  if (mechanism != Mechanism::kPartialBF &&
      mechanism != Mechanism::kDecisionBoundary) {
    return;
  }
  if (k_prime == 0) {
    if (n_prime > n - k) {
      throw ConfigError(fmt::format("n'={} exceeds n-k={}", n_prime, n - k));
    }
    return;
  }
  if (k_prime > k) {
    throw ConfigError(fmt::format("k'={} must lie in (0, k={}]", k_prime, k));
  }
  if (n_prime <= k_prime || n_prime > n - k + k_prime) {
    throw ConfigError(fmt::format("n'={} must lie in (k'={}, n-k+k'={}]",
                                  n_prime, k_prime, n - k + k_prime));
  }
}

std::string LotteryConfig::describe() const {
  if (mechanism == Mechanism::kPartialBF ||
      mechanism == Mechanism::kDecisionBoundary) {
    return fmt::format("{}(k={},n={},k'={},n'={})", to_string(mechanism), k, n,
                       k_prime, n_prime);
  }
  return fmt::format("{}(k={},n={})", to_string(mechanism), k, n);
}

SelectionWeights::SelectionWeights(std::size_t round,
                                   std::vector<IndividualId> survivors,
                                   std::vector<double> weights)
    : round_(round),
      survivors_(std::move(survivors)),
      weights_(std::move(weights)) {
  if (survivors_.size() != weights_.size()) {
    throw StructuralError(fmt::format("round {}: {} survivors but {} weights",
                                      round_, survivors_.size(),
                                      weights_.size()));
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) {
      throw StructuralError(fmt::format("round {}: negative weight", round_));
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    throw StructuralError(
        fmt::format("round {}: weights sum to {}, not 1", round_, sum));
  }
}

std::size_t AllocationResult::selected_count() const {
  return static_cast<std::size_t>(
      std::count(outcomes.begin(), outcomes.end(), std::uint8_t{1}));
}

void AllocationResult::validate(std::size_t k) const {
  for (auto o : outcomes) {
    if (o > 1) throw StructuralError("outcome is not binary");
  }
  if (selected_count() != k) {
    throw StructuralError(
        fmt::format("{} outcomes equal 1, expected {}", selected_count(), k));
  }
  if (selected_order.size() != k) {
    throw StructuralError("selected_order length differs from k");
  }
  std::unordered_set<IndividualId> seen(selected_order.begin(),
                                        selected_order.end());
  if (seen.size() != k) throw StructuralError("selected_order repeats an id");
}

void UtilityGroundTruth::validate(std::size_t n) const {
  if (!realized && !probabilities) {
    throw StructuralError("ground truth has neither outcomes nor probabilities");
  }
  if (realized) {
    if (realized->size() != n) throw StructuralError("realized length != n");
    for (auto v : *realized) {
      if (v > 1) throw StructuralError("realized outcome is not binary");
    }
  }
  if (probabilities) {
    if (probabilities->size() != n) {
      throw StructuralError("probabilities length != n");
    }
    for (double p : *probabilities) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw StructuralError("probability outside [0, 1]");
      }
    }
  }
}

}  // namespace randalloc

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

// Test-only exact oracles. They share no code with the library: selection
// probabilities come from walking every ordered selection sequence.

#ifndef RANDALLOC_TESTS_ORACLES_ENUMERATION_HPP_
#define RANDALLOC_TESTS_ORACLES_ENUMERATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

namespace randalloc::oracle {

namespace detail {

// Adds `mass` times the probability of every continuation to `inclusion`.
inline void walk(const std::vector<double>& weights, std::vector<bool>& taken,
                 std::size_t remaining, double mass,
                 std::vector<double>& inclusion) {
  if (remaining == 0) return;
  double total = 0.0;
  std::size_t free_count = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!taken[i]) {
      total += weights[i];
      ++free_count;
    }
  }
  const bool uniform = !(total > 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (taken[i]) continue;
    const double p = uniform ? 1.0 / static_cast<double>(free_count)
                             : weights[i] / total;
    if (p == 0.0) continue;
    inclusion[i] += mass * p;
    taken[i] = true;
    walk(weights, taken, remaining - 1, mass * p, inclusion);
    taken[i] = false;
  }
}

}  // namespace detail

// Inclusion probability of each index when `k` are drawn sequentially with
// probability proportional to weight among those left (uniform once only
// zero weights remain).
inline std::vector<double> inclusion_probabilities(
    const std::vector<double>& weights, std::size_t k) {
  std::vector<double> inclusion(weights.size(), 0.0);
  std::vector<bool> taken(weights.size(), false);
  detail::walk(weights, taken, k, 1.0, inclusion);
  return inclusion;
}

// Inclusion probabilities of the partial lottery: the k - k_prime strongest
// claims (ties to the lower index) are certain, the next n_prime share the
// remaining k_prime slots by sequential claim-weighted draws.
inline std::vector<double> partial_inclusion_probabilities(
    const std::vector<double>& claims, std::size_t k, std::size_t k_prime,
    std::size_t n_prime) {
  std::vector<std::size_t> rank(claims.size());
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    return claims[a] > claims[b];
  });
  std::vector<double> inclusion(claims.size(), 0.0);
  const std::size_t fixed = k - k_prime;
  for (std::size_t r = 0; r < fixed; ++r) inclusion[rank[r]] = 1.0;
  if (k_prime == 0) return inclusion;
  std::vector<double> pool_weights;
  for (std::size_t r = fixed; r < fixed + n_prime; ++r) {
    pool_weights.push_back(claims[rank[r]]);
  }
  const auto pool = inclusion_probabilities(pool_weights, k_prime);
  for (std::size_t r = 0; r < n_prime; ++r) inclusion[rank[fixed + r]] = pool[r];
  return inclusion;
}

// Standard error of a frequency estimate of probability p from `draws`.
inline double binomial_sigma(double p, std::size_t draws) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
}

}  // namespace randalloc::oracle

#endif  // RANDALLOC_TESTS_ORACLES_ENUMERATION_HPP_

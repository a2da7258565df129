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

#include "randalloc/lottery/lottery.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "randalloc/core/compliance.hpp"
#include "randalloc/core/errors.hpp"
#include "randalloc/lottery/sum_tree.hpp"

namespace randalloc::lottery {
namespace {

constexpr const char* kFallbackSuffix = "+zero_claim_fallback";

void check_k(std::size_t k, std::size_t n) {
  if (k == 0 || k > n) {
    throw ConfigError(fmt::format("need 1 <= k <= n, got k={} n={}", k, n));
  }
}

std::vector<std::size_t> all_positions(std::size_t n) {
  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  return positions;
}

std::string with_fallback(std::string descriptor, bool used) {
  if (used) descriptor += kFallbackSuffix;
  return descriptor;
}

}  // namespace

std::optional<std::vector<double>> bf_weights(
    std::span<const double> survivor_claims) {
  double total = 0.0;
  for (double c : survivor_claims) total += c;
  if (!(total > 0.0)) return std::nullopt;
  std::vector<double> weights(survivor_claims.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = survivor_claims[i] / total;
  }
  return weights;
}

std::optional<std::vector<double>> uniform_weights(
    std::span<const double> survivor_claims) {
  if (survivor_claims.empty()) return std::nullopt;
  return std::vector<double>(survivor_claims.size(),
                             1.0 / static_cast<double>(survivor_claims.size()));
}

std::vector<SelectionWeights> SelectionTrace::weights() const {
  std::vector<SelectionWeights> out;
  out.reserve(rounds.size());
  for (const auto& r : rounds) out.push_back(r.weights);
  return out;
}

AllocationResult make_result(const ClaimProfile& claims,
                             std::span<const std::size_t> selected,
                             std::uint64_t seed, std::string mechanism) {
  AllocationResult result;
  result.outcomes.assign(claims.size(), 0);
  result.selected_order.reserve(selected.size());
  for (std::size_t p : selected) {
    result.outcomes[p] = 1;
    result.selected_order.push_back(claims.id(p));
  }
  result.seed = seed;
  result.mechanism = std::move(mechanism);
  return result;
}

Selection iterative_weighted_selection(const ClaimProfile& claims,
                                       std::size_t k, const WeightRule& rule,
                                       RandomSource& rng,
                                       const SelectionOptions& options) {
  check_k(k, claims.size());
  std::vector<std::size_t> survivors = all_positions(claims.size());
  std::vector<std::size_t> chosen_positions;
  chosen_positions.reserve(k);
  Selection selection;
  bool used_fallback = false;

  std::vector<double> survivor_claims;
  std::vector<IndividualId> survivor_ids;
  for (std::size_t round = 1; round <= k; ++round) {
    survivor_claims.clear();
    survivor_ids.clear();
    for (std::size_t p : survivors) {
      survivor_claims.push_back(claims.claim(p));
      survivor_ids.push_back(claims.id(p));
    }
    auto weights = rule(survivor_claims);
    const double total =
        weights ? std::accumulate(weights->begin(), weights->end(), 0.0) : 0.0;
    if (!weights || !(total > 0.0)) {
      if (!options.zero_claim_fallback) {
        throw ConfigError(fmt::format(
            "weight rule has no positive weight with {} slot(s) remaining",
            k - round + 1));
      }
      used_fallback = true;
      weights = uniform_weights(survivor_claims);
    }
    SelectionWeights round_weights(round, survivor_ids, *weights);

    const auto w = round_weights.weights();
    const double target = rng.uniform() * std::accumulate(w.begin(), w.end(), 0.0);
    std::size_t pick = w.size();
    double cumulative = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (!(w[j] > 0.0)) continue;
      cumulative += w[j];
      pick = j;
      if (cumulative > target) break;
    }
    // pick == size() is impossible: the weights sum to 1.
    if (options.record_trace) {
      selection.trace.rounds.push_back(
          {std::move(round_weights), claims.id(survivors[pick])});
    }
    chosen_positions.push_back(survivors[pick]);
    survivors.erase(survivors.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  selection.trace.pool_begin = 0;
  selection.trace.pool_end = claims.size();
  selection.trace.zero_claim_fallback = used_fallback;
  selection.result = make_result(claims, chosen_positions, rng.seed(),
                                 with_fallback("iterative", used_fallback));
  return selection;
}

std::vector<std::size_t> weighted_draw(std::span<const std::size_t> candidates,
                                       std::span<const double> weights,
                                       std::size_t count, RandomSource& rng,
                                       const SelectionOptions& options,
                                       std::span<const IndividualId> ids,
                                       SelectionTrace* trace,
                                       bool* used_fallback) {
  if (weights.size() != candidates.size()) {
    throw StructuralError("weighted_draw: weights and candidates differ in size");
  }
  if (count > candidates.size()) {
    throw PreconditionError(fmt::format(
        "cannot draw {} from a pool of {}", count, candidates.size()));
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw StructuralError("weighted_draw: weights must be finite and >= 0");
    }
  }

  SumTree tree(weights);
  std::vector<std::uint8_t> taken(candidates.size(), 0);
  std::vector<std::size_t> drawn;
  drawn.reserve(count);
  const bool tracing = trace != nullptr && options.record_trace;
  bool fallback = false;

  for (std::size_t r = 0; r < count; ++r) {
    if (!(tree.total() > 0.0)) {
      if (!options.zero_claim_fallback) {
        throw ConfigError(fmt::format(
            "no positive weight among survivors with {} slot(s) remaining",
            count - r));
      }
      fallback = true;
      std::vector<double> uniform(candidates.size());
      for (std::size_t i = 0; i < uniform.size(); ++i) {
        uniform[i] = taken[i] ? 0.0 : 1.0;
      }
      tree = SumTree(uniform);
    }

    const double total = tree.total();
    const std::size_t idx = tree.find(rng.uniform() * total);

    if (tracing) {
      std::vector<IndividualId> survivor_ids;
      std::vector<double> round_weights;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (taken[i]) continue;
        survivor_ids.push_back(ids[candidates[i]]);
        round_weights.push_back(tree.weight(i) / total);
      }
      trace->rounds.push_back(
          {SelectionWeights(trace->rounds.size() + 1, std::move(survivor_ids),
                            std::move(round_weights)),
           ids[candidates[idx]]});
    }

    taken[idx] = 1;
    tree.set(idx, 0.0);
    drawn.push_back(candidates[idx]);
  }

  if (trace != nullptr) trace->zero_claim_fallback |= fallback;
  if (used_fallback != nullptr) *used_fallback = fallback;
  return drawn;
}

AllocationResult top_k(const ClaimProfile& claims, std::size_t k) {
  check_k(k, claims.size());
  const auto order = canonical_order(claims);
  return make_result(claims, std::span(order).first(k), 0, "topk");
}

AllocationResult unweighted_lottery(const ClaimProfile& claims, std::size_t k,
                                    RandomSource& rng) {
  check_k(k, claims.size());
  const auto positions = all_positions(claims.size());
  const std::vector<double> ones(claims.size(), 1.0);
  const auto drawn = weighted_draw(positions, ones, k, rng, {}, claims.ids(),
                                   nullptr);
  return make_result(claims, drawn, rng.seed(), "unweighted");
}

Selection bf_lottery(const ClaimProfile& claims, std::size_t k,
                     RandomSource& rng, const SelectionOptions& options) {
  check_k(k, claims.size());
  Selection selection;
  const auto positions = all_positions(claims.size());
  bool used_fallback = false;
  const auto drawn =
      weighted_draw(positions, claims.claims(), k, rng, options, claims.ids(),
                    &selection.trace, &used_fallback);
  selection.trace.pool_begin = 0;
  selection.trace.pool_end = claims.size();
  selection.result =
      make_result(claims, drawn, rng.seed(), with_fallback("bf", used_fallback));
  return selection;
}

Selection partial_bf_lottery(const ClaimProfile& claims,
                             const LotteryConfig& config, RandomSource& rng,
                             const SelectionOptions& options) {
  const auto order = canonical_order(claims);
  return partial_bf_lottery(claims, config, order, rng, options);
}

Selection partial_bf_lottery(const ClaimProfile& claims,
                             const LotteryConfig& config,
                             std::span<const std::size_t> order,
                             RandomSource& rng,
                             const SelectionOptions& options) {
  config.validate();
  if (config.n != claims.size()) {
    throw StructuralError(fmt::format("config n={} but {} claims", config.n,
                                      claims.size()));
  }
  if (order.size() != claims.size()) {
    throw StructuralError("canonical order has the wrong length");
  }

  const std::size_t fixed = config.k - config.k_prime;
  Selection selection;
  std::vector<std::size_t> selected(order.begin(),
                                    order.begin() + static_cast<std::ptrdiff_t>(fixed));
  for (std::size_t p : selected) {
    selection.trace.deterministic.push_back(claims.id(p));
  }
  selection.trace.pool_begin = fixed;
  selection.trace.pool_end = fixed + (config.k_prime == 0 ? 0 : config.n_prime);

  bool used_fallback = false;
  if (config.k_prime > 0) {
    const auto pool = order.subspan(fixed, config.n_prime);
    std::vector<double> pool_claims;
    pool_claims.reserve(pool.size());
    for (std::size_t p : pool) pool_claims.push_back(claims.claim(p));
    const auto drawn =
        weighted_draw(pool, pool_claims, config.k_prime, rng, options,
                      claims.ids(), &selection.trace, &used_fallback);
    selected.insert(selected.end(), drawn.begin(), drawn.end());
  }

  const std::string descriptor =
      config.k_prime == 0
          ? std::string("topk")
          : fmt::format("partial_bf(k'={},n'={})", config.k_prime,
                        config.n_prime);
  selection.result = make_result(claims, selected, rng.seed(),
                                 with_fallback(descriptor, used_fallback));
  return selection;
}

Selection allocate(const ClaimProfile& claims, const LotteryConfig& config,
                   RandomSource& rng, const SelectionOptions& options) {
  config.validate();
  switch (config.mechanism) {
    case Mechanism::kTopK: {
      Selection selection;
      selection.result = top_k(claims, config.k);
      selection.trace.deterministic = selection.result.selected_order;
      return selection;
    }
    case Mechanism::kUnweighted: {
      Selection selection;
      const auto positions = all_positions(claims.size());
      const std::vector<double> ones(claims.size(), 1.0);
      const auto drawn = weighted_draw(positions, ones, config.k, rng, options,
                                       claims.ids(), &selection.trace);
      selection.trace.pool_end = claims.size();
      selection.result = make_result(claims, drawn, rng.seed(), "unweighted");
      return selection;
    }
    case Mechanism::kBF:
      return bf_lottery(claims, config.k, rng, options);
    case Mechanism::kPartialBF:
    case Mechanism::kDecisionBoundary:
      return partial_bf_lottery(claims, config, rng, options);
    default:
      throw ConfigError(fmt::format(
          "mechanism '{}' needs model predictions; use uncertain_alloc",
          to_string(config.mechanism)));
  }
}

}  // namespace randalloc::lottery

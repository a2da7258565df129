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

#include "randalloc/uncertain_alloc/mechanisms.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "randalloc/core/compliance.hpp"
#include "randalloc/core/errors.hpp"
#include "randalloc/core/log.hpp"
#include "randalloc/lottery/lottery.hpp"

namespace randalloc::uncertain {
namespace {

void check_k(std::size_t k, std::size_t n) {
  if (k == 0 || k > n) {
    throw ConfigError(fmt::format("k={} outside [1, n={}]", k, n));
  }
}

std::string describe(std::string_view name, std::size_t k_prime,
                     std::size_t n_prime) {
  return fmt::format("{}(k'={},n'={})", name, k_prime, n_prime);
}

}  // namespace

double UncertainAllocationReport::kprime_rate() const {
  return k == 0 ? 0.0 : static_cast<double>(k_prime) / static_cast<double>(k);
}

double UncertainAllocationReport::nprime_rate() const {
  return n == 0 ? 0.0 : static_cast<double>(n_prime) / static_cast<double>(n);
}

UncertainAllocationReport boundary_randomize(const ClaimProfile& scores,
                                             const LotteryConfig& config,
                                             RandomSource& rng) {
  LotteryConfig cfg = config;
  if (cfg.mechanism != Mechanism::kPartialBF) cfg.mechanism = Mechanism::kDecisionBoundary;
  UncertainAllocationReport report;
  report.allocation = lottery::partial_bf_lottery(scores, cfg, rng).result;
  report.k = cfg.k;
  report.n = cfg.n;
  report.k_prime = cfg.k_prime;
  report.n_prime = cfg.k_prime == 0 ? 0 : cfg.n_prime;
  return report;
}

UncertainAllocationReport variance_randomize(const ClaimProfile& scores,
                                             std::span<const double> votes,
                                             std::size_t members, std::size_t k,
                                             RandomSource& rng) {
  const std::size_t n = scores.size();
  check_k(k, n);
  if (votes.size() != n) {
    throw StructuralError(
        fmt::format("{} vote fractions for {} individuals", votes.size(), n));
  }
  if (members == 0) throw ConfigError("ensemble has no members");
  for (double v : votes) {
    if (!(v >= 0.0 && v <= 1.0)) throw StructuralError("vote fraction outside [0, 1]");
  }

  const auto order = canonical_order(scores);
  UncertainAllocationReport report;
  report.k = k;
  report.n = n;

  std::vector<std::size_t> selected;
  std::vector<std::size_t> pool;
  std::vector<double> weights;
  const double demoted_weight =
      static_cast<double>(members - 1) / static_cast<double>(members);
  for (std::size_t p : order) {
    if (votes[p] == 1.0) {
      if (selected.size() < k) {
        selected.push_back(p);
      } else {
        ++report.demoted;
        if (demoted_weight > 0.0) {
          pool.push_back(p);
          weights.push_back(demoted_weight);
        }
      }
    } else if (votes[p] > 0.0) {
      pool.push_back(p);
      weights.push_back(votes[p]);
    }
  }
  if (report.demoted > 0) {
    logger().warn("variance randomization: {} unanimous individuals exceed k={}; "
                  "kept the top {} by main score, demoted {} to the lottery",
                  selected.size() + report.demoted, k, k, report.demoted);
  }

  const std::size_t open = k - selected.size();
  report.k_prime = std::min(open, pool.size());
  report.n_prime = pool.size();
  if (report.k_prime > 0) {
    const auto drawn = lottery::weighted_draw(pool, weights, report.k_prime, rng, {},
                                              scores.ids(), nullptr);
    selected.insert(selected.end(), drawn.begin(), drawn.end());
  }
  if (selected.size() < k) {
    report.score_filled = k - selected.size();
    logger().debug("variance randomization: lottery pool of {} short by {}; filled by "
                   "main score",
                   pool.size(), report.score_filled);
    std::vector<std::uint8_t> taken(n, 0);
    for (std::size_t p : selected) taken[p] = 1;
    for (std::size_t p : order) {
      if (selected.size() == k) break;
      if (!taken[p]) selected.push_back(p);
    }
  }
  report.allocation = lottery::make_result(
      scores, selected, rng.seed(), describe("variance", report.k_prime, report.n_prime));
  return report;
}

UncertainAllocationReport variance_randomize(const ClaimProfile& scores,
                                             const predict::BootstrapEnsemble& ensemble,
                                             predict::VoteRule rule, std::size_t k,
                                             RandomSource& rng) {
  const auto votes = predict::vote_fractions(ensemble, scores.claims(), k, rule);
  return variance_randomize(scores, votes, ensemble.members(), k, rng);
}

std::string_view to_string(OutlierMode mode) {
  return mode == OutlierMode::kUnweightedPool ? "unweighted" : "weighted";
}

OutlierMode parse_outlier_mode(std::string_view text) {
  if (text == "unweighted") return OutlierMode::kUnweightedPool;
  if (text == "weighted") return OutlierMode::kWeightedPool;
  throw ConfigError(fmt::format("unknown outlier mode '{}'", text));
}

UncertainAllocationReport outlier_randomize(const ClaimProfile& scores,
                                            std::span<const double> p_values,
                                            double alpha, std::size_t k,
                                            OutlierMode mode, RandomSource& rng) {
  const std::size_t n = scores.size();
  check_k(k, n);
  if (p_values.size() != n) {
    throw StructuralError(fmt::format("{} p-values for {} individuals", p_values.size(), n));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError(fmt::format("alpha {} outside (0, 1)", alpha));
  }

  const auto order = canonical_order(scores);
  UncertainAllocationReport report;
  report.k = k;
  report.n = n;

  std::vector<std::size_t> selected;
  for (std::size_t r = 0; r < k; ++r) {
    if (p_values[order[r]] <= alpha) {
      ++report.k_prime;
    } else {
      selected.push_back(order[r]);
    }
  }
  std::vector<std::size_t> pool;
  std::vector<double> weights;
  for (std::size_t p : order) {
    if (p_values[p] > alpha) continue;
    pool.push_back(p);
    weights.push_back(mode == OutlierMode::kUnweightedPool ? 1.0 : scores.claim(p));
  }
  report.n_prime = pool.size();
  if (report.k_prime > 0) {
    const auto drawn = lottery::weighted_draw(pool, weights, report.k_prime, rng, {},
                                              scores.ids(), nullptr);
    selected.insert(selected.end(), drawn.begin(), drawn.end());
  }
  report.allocation = lottery::make_result(
      scores, selected, rng.seed(),
      describe(mode == OutlierMode::kUnweightedPool ? "outlier" : "outlier_weighted",
               report.k_prime, report.n_prime));
  return report;
}

UncertainAllocationReport outlier_randomize(const ClaimProfile& scores,
                                            const predict::ConformalScorer& scorer,
                                            std::size_t k, OutlierMode mode,
                                            RandomSource& rng) {
  return outlier_randomize(scores, scorer.p_values, scorer.alpha, k, mode, rng);
}

LotteryConfig matched_boundary_config(const UncertainAllocationReport& report) {
  LotteryConfig cfg;
  cfg.k = report.k;
  cfg.n = report.n;
  if (report.k_prime == 0 || report.k == report.n) {
    cfg.mechanism = Mechanism::kTopK;
    return cfg;
  }
  cfg.mechanism = Mechanism::kDecisionBoundary;
  cfg.k_prime = report.k_prime;
  const std::size_t upper = report.n - report.k + report.k_prime;
  cfg.n_prime = std::clamp(report.n_prime, report.k_prime + 1, upper);
  if (cfg.n_prime != report.n_prime) {
    logger().debug("matched boundary band moved from n'={} to n'={}", report.n_prime,
                   cfg.n_prime);
  }
  cfg.validate();
  return cfg;
}

}  // namespace randalloc::uncertain

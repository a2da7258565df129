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

#include "randalloc/predict/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "randalloc/core/compliance.hpp"
#include "randalloc/core/errors.hpp"
#include "randalloc/core/log.hpp"
#include "randalloc/core/parallel.hpp"

namespace randalloc::predict {
namespace {

std::vector<std::size_t> draw_subset(std::size_t n, std::size_t size,
                                     SubsetSampling sampling, RandomSource& rng) {
  std::vector<std::size_t> subset;
  if (sampling == SubsetSampling::kWithReplacement) {
    subset.resize(size);
    for (auto& r : subset) r = rng.below(n);
  } else {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < size; ++i) {
      std::swap(perm[i], perm[i + rng.below(n - i)]);
    }
    subset.assign(perm.begin(), perm.begin() + size);
  }
  std::sort(subset.begin(), subset.end());
  return subset;
}

bool mixed(std::span<const std::uint8_t> y, std::span<const std::size_t> rows) {
  bool zero = false;
  bool one = false;
  for (std::size_t r : rows) (y[r] ? one : zero) = true;
  return zero && one;
}

}  // namespace

std::string_view to_string(VoteRule rule) {
  return rule == VoteRule::kMainThreshold ? "main_threshold" : "member_topk";
}

VoteRule parse_vote_rule(std::string_view text) {
  if (text == "main_threshold") return VoteRule::kMainThreshold;
  if (text == "member_topk") return VoteRule::kMemberTopK;
  throw ConfigError(fmt::format("unknown vote rule '{}'", text));
}

std::string_view to_string(SubsetSampling sampling) {
  return sampling == SubsetSampling::kWithoutReplacement ? "without_replacement"
                                                         : "with_replacement";
}

SubsetSampling parse_sampling(std::string_view text) {
  if (text == "without_replacement") return SubsetSampling::kWithoutReplacement;
  if (text == "with_replacement") return SubsetSampling::kWithReplacement;
  throw ConfigError(fmt::format("unknown subset sampling '{}'", text));
}

void EnsembleOptions::validate() const {
  if (members == 0) throw ConfigError("ensemble needs at least one member");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError(fmt::format("subset fraction {} outside (0, 1]", fraction));
  }
}

std::vector<double> BootstrapEnsemble::spread() const {
  std::vector<double> out(pool_size(), 0.0);
  const double b = static_cast<double>(members());
  for (std::size_t i = 0; i < pool_size(); ++i) {
    double mean = 0.0;
    for (std::size_t m = 0; m < members(); ++m) mean += predictions(m, i);
    mean /= b;
    double ss = 0.0;
    for (std::size_t m = 0; m < members(); ++m) {
      ss += (predictions(m, i) - mean) * (predictions(m, i) - mean);
    }
    out[i] = std::sqrt(ss / b);
  }
  return out;
}

BootstrapEnsemble bootstrap_ensemble(const ModelSpec& spec, const Matrix& train_x,
                                     std::span<const std::uint8_t> train_y,
                                     const Matrix& pool,
                                     const EnsembleOptions& options,
                                     const RandomSource& rng) {
  options.validate();
  const std::size_t n = train_x.rows();
  if (n != train_y.size()) throw StructuralError("feature rows and labels differ");
  if (pool.cols() != train_x.cols()) throw StructuralError("pool feature width differs");
  const std::size_t size = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(options.fraction * static_cast<double>(n))));

  BootstrapEnsemble ensemble;
  ensemble.predictions = Matrix(options.members, pool.rows());
  ensemble.subset_size = size;
  parallel_for(options.members, options.threads, [&](std::size_t b) {
    RandomSource member_rng = rng.derive(b);
    std::vector<std::size_t> subset;
    std::size_t attempt = 0;
    for (;; ++attempt) {
      subset = draw_subset(n, size, options.sampling, member_rng);
      if (mixed(train_y, subset)) break;
      if (attempt >= options.max_retries) {
        throw TrainingError(fmt::format(
            "ensemble member {}: no two-class subset after {} tries", b, attempt + 1));
      }
    }
    if (attempt > 0) {
      logger().warn("ensemble member {} redrew its subset {} time(s)", b, attempt);
    }
    std::vector<std::uint8_t> y(subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i) y[i] = train_y[subset[i]];
    RandomSource model_rng = member_rng.derive(1);
    const auto model = train(spec, train_x.select_rows(subset), y, model_rng);
    for (std::size_t i = 0; i < pool.rows(); ++i) {
      ensemble.predictions(b, i) = std::clamp(model->predict(pool.row(i)), 0.0, 1.0);
    }
  });
  return ensemble;
}

double vote_threshold(std::span<const double> main_scores, std::size_t k) {
  if (k >= main_scores.size()) return -std::numeric_limits<double>::infinity();
  const auto order = canonical_order(main_scores);
  return main_scores[order[k]];
}

std::vector<double> vote_fractions(const BootstrapEnsemble& ensemble,
                                   std::span<const double> main_scores,
                                   std::size_t k, VoteRule rule) {
  const std::size_t n = ensemble.pool_size();
  if (main_scores.size() != n) {
    throw StructuralError(fmt::format(
        "ensemble covers {} rows but {} main scores given", n, main_scores.size()));
  }
  std::vector<std::size_t> votes(n, 0);
  if (rule == VoteRule::kMainThreshold) {
    const double threshold = vote_threshold(main_scores, k);
    for (std::size_t m = 0; m < ensemble.members(); ++m) {
      for (std::size_t i = 0; i < n; ++i) {
        if (ensemble.predictions(m, i) > threshold) ++votes[i];
      }
    }
  } else {
    const std::size_t take = std::min(k, n);
    for (std::size_t m = 0; m < ensemble.members(); ++m) {
      const auto order = canonical_order(ensemble.predictions.row(m));
      for (std::size_t r = 0; r < take; ++r) ++votes[order[r]];
    }
  }
  std::vector<double> fractions(n);
  const double b = static_cast<double>(ensemble.members());
  for (std::size_t i = 0; i < n; ++i) fractions[i] = static_cast<double>(votes[i]) / b;
  return fractions;
}

}  // namespace randalloc::predict

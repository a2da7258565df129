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

#include "randalloc/predict/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "randalloc/core/errors.hpp"
#include "randalloc/core/log.hpp"
#include "randalloc/core/parallel.hpp"

namespace randalloc::predict {

NoveltyScorer::NoveltyScorer(const Matrix& reference, std::size_t cap,
                             RandomSource& rng) {
  if (reference.rows() == 0) throw PreconditionError("novelty reference set is empty");
  if (cap == 0 || reference.rows() <= cap) {
    reference_ = reference;
    return;
  }
  std::vector<std::size_t> perm(reference.rows());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = 0; i < cap; ++i) {
    std::swap(perm[i], perm[i + rng.below(perm.size() - i)]);
  }
  perm.resize(cap);
  std::sort(perm.begin(), perm.end());
  reference_ = reference.select_rows(perm);
}

double NoveltyScorer::score(std::span<const double> x) const {
  if (x.size() != reference_.cols()) throw StructuralError("feature width differs");
  double total = 0.0;
  for (std::size_t r = 0; r < reference_.rows(); ++r) {
    const auto ref = reference_.row(r);
    double ss = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = x[j] - ref[j];
      ss += d * d;
    }
    total += std::sqrt(ss);
  }
  return total / static_cast<double>(reference_.rows());
}

std::vector<double> NoveltyScorer::score_rows(const Matrix& rows,
                                              unsigned threads) const {
  std::vector<double> out(rows.rows());
  parallel_for(rows.rows(), threads,
               [&](std::size_t i) { out[i] = score(rows.row(i)); });
  return out;
}

void ConformalOptions::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError(fmt::format("alpha {} outside (0, 1)", alpha));
  }
}

std::size_t ConformalScorer::flagged_count() const {
  return static_cast<std::size_t>(std::count_if(
      p_values.begin(), p_values.end(), [&](double p) { return p <= alpha; }));
}

double conformal_pvalue(std::span<const double> sorted_calibration, double score) {
  const std::size_t n = sorted_calibration.size();
  const auto first_ge =
      std::lower_bound(sorted_calibration.begin(), sorted_calibration.end(), score);
  const auto at_least = static_cast<std::size_t>(sorted_calibration.end() - first_ge);
  return static_cast<double>(1 + at_least) / static_cast<double>(n + 1);
}

double conformal_quantile(std::span<const double> sorted_calibration, double alpha) {
  const std::size_t n = sorted_calibration.size();
  if (n == 0) throw PreconditionError("calibration set is empty");
  // The small slack keeps exact products such as 10 * 0.8 from rounding up.
  const double rank =
      std::ceil(static_cast<double>(n + 1) * (1.0 - alpha) - 1e-9);
  if (rank > static_cast<double>(n)) return std::numeric_limits<double>::infinity();
  const auto index = static_cast<std::size_t>(std::max(rank, 1.0)) - 1;
  return sorted_calibration[index];
}

ConformalScorer conformal_pvalues(const Matrix& train, const Matrix& calibration,
                                  const Matrix& pool, const ConformalOptions& options,
                                  RandomSource& rng) {
  options.validate();
  if (calibration.rows() == 0) throw PreconditionError("calibration fold is empty");
  if (calibration.cols() != train.cols() || pool.cols() != train.cols()) {
    throw StructuralError("train, calibration and pool feature widths differ");
  }
  const NoveltyScorer scorer(train, options.reference_cap, rng);

  ConformalScorer out;
  out.alpha = options.alpha;
  out.reference_size = scorer.reference_size();
  out.calibration_scores = scorer.score_rows(calibration, options.threads);
  std::sort(out.calibration_scores.begin(), out.calibration_scores.end());
  out.q_hat = conformal_quantile(out.calibration_scores, options.alpha);
  out.scores = scorer.score_rows(pool, options.threads);
  out.p_values.resize(out.scores.size());
  for (std::size_t i = 0; i < out.scores.size(); ++i) {
    out.p_values[i] = conformal_pvalue(out.calibration_scores, out.scores[i]);
  }
  logger().info("conformal scorer: {} reference rows, {} calibration rows, q_hat {:.6g}, "
                "{} of {} pool rows flagged at alpha {}",
                out.reference_size, calibration.rows(), out.q_hat,
                out.flagged_count(), pool.rows(), options.alpha);
  return out;
}

}  // namespace randalloc::predict

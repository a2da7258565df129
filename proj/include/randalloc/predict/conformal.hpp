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

// Split-conformal outlier detection.
//
// The novelty score of x is its mean Euclidean distance to a reference set
// (the proper training rows, subsampled to a cap). With calibration scores
// s_1..s_n drawn from the same distribution,
//
//   p(x) = (1 + #{j : s_j >= s(x)}) / (n + 1)
//
// is a valid p-value: P(p(x) <= alpha) <= alpha for exchangeable x.

#ifndef RANDALLOC_PREDICT_CONFORMAL_HPP_
#define RANDALLOC_PREDICT_CONFORMAL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "randalloc/core/random.hpp"
#include "randalloc/predict/dataset.hpp"

namespace randalloc::predict {

inline constexpr std::size_t kDefaultReferenceCap = 2000;

class NoveltyScorer {
 public:
  // Keeps at most `cap` reference rows, chosen without replacement by `rng`
  // when the reference is larger; cap 0 keeps every row.
  NoveltyScorer(const Matrix& reference, std::size_t cap, RandomSource& rng);

  double score(std::span<const double> x) const;
  std::vector<double> score_rows(const Matrix& rows, unsigned threads) const;
  std::size_t reference_size() const { return reference_.rows(); }

 private:
  Matrix reference_;
};

struct ConformalOptions {
  double alpha = 0.2;
  std::size_t reference_cap = kDefaultReferenceCap;
  unsigned threads = 0;

  void validate() const;
};

struct ConformalScorer {
  double alpha = 0.0;
  // Ascending.
  std::vector<double> calibration_scores;
  // ceil((n + 1)(1 - alpha))-th smallest calibration score; +infinity when
  // that rank exceeds n.
  double q_hat = 0.0;
  std::size_t reference_size = 0;
  // Pool rows.
  std::vector<double> scores;
  std::vector<double> p_values;

  bool flagged(std::size_t i) const { return p_values[i] <= alpha; }
  std::size_t flagged_count() const;
};

// p-value of `score` against ascending calibration scores.
double conformal_pvalue(std::span<const double> sorted_calibration, double score);

double conformal_quantile(std::span<const double> sorted_calibration, double alpha);

ConformalScorer conformal_pvalues(const Matrix& train, const Matrix& calibration,
                                  const Matrix& pool, const ConformalOptions& options,
                                  RandomSource& rng);

}  // namespace randalloc::predict

#endif  // RANDALLOC_PREDICT_CONFORMAL_HPP_

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

#ifndef RANDALLOC_METRICS_METRICS_HPP_
#define RANDALLOC_METRICS_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "randalloc/core/types.hpp"

namespace randalloc::metrics {

// Precision of a selection against realized outcomes:
// (1/k) * sum_i o*_i [o_i = 1]. Throws UnsupportedMetricError without
// realized outcomes and StructuralError unless exactly k are selected.
double utility(const AllocationResult& result, const UtilityGroundTruth& truth,
               std::size_t k);

// (1/k) * sum_i p_i [o_i = 1].
double expected_utility(const AllocationResult& result,
                        const UtilityGroundTruth& truth, std::size_t k);

// Binary outcomes of m decision-makers (rows) over n individuals (columns).
// Rows may select different numbers of individuals.
class EnsembleOutcomes {
 public:
  explicit EnsembleOutcomes(std::size_t n) : n_(n) {}
  static EnsembleOutcomes from_rows(
      const std::vector<std::vector<std::uint8_t>>& rows);

  // Throws StructuralError on length mismatch or non-binary entries.
  void add_row(std::span<const std::uint8_t> outcomes);

  std::size_t m() const { return m_; }
  std::size_t n() const { return n_; }
  std::uint8_t at(std::size_t row, std::size_t individual) const {
    return data_[row * n_ + individual];
  }
  std::span<const std::uint8_t> row(std::size_t j) const {
    return std::span(data_).subspan(j * n_, n_);
  }

  // 1 where the individual received 0 from every decision-maker.
  std::vector<std::uint8_t> excluded_everywhere() const;

 private:
  std::size_t n_;
  std::size_t m_ = 0;
  std::vector<std::uint8_t> data_;
};

// Fraction of individuals excluded by every row; defined for m >= 1.
double exclusion_rate(const EnsembleOutcomes& outcomes);

// Systemic exclusion rate. Requires m > 1 (PreconditionError otherwise).
double ser(const EnsembleOutcomes& outcomes);

// (1/n) sum_i prod_j (1 - q_ij) for independent decision-makers with
// inclusion probabilities q (rows = decision-makers).
double expected_ser(const std::vector<std::vector<double>>& inclusion);

enum class DeltaMode { kAbsolute, kRelative };

// Loss of `value` relative to `baseline`: baseline - value, or
// (baseline - value) / baseline in relative mode.
double utility_delta(double baseline, double value,
                     DeltaMode mode = DeltaMode::kAbsolute);

struct FrontierPoint {
  double utility_delta = 0.0;
  double ser = 0.0;
  LotteryConfig config;
  std::string label;
};

inline constexpr double kFrontierBinWidth = 0.005;

// Keeps the lowest-SER point of each utility_delta bin, then drops points
// whose SER is not strictly below every point with a smaller delta. Output
// is sorted by utility_delta.
std::vector<FrontierPoint> frontier(std::vector<FrontierPoint> points,
                                    double bin_width = kFrontierBinWidth);

}  // namespace randalloc::metrics

#endif  // RANDALLOC_METRICS_METRICS_HPP_

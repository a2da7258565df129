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

#include "randalloc/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "randalloc/core/errors.hpp"

namespace randalloc::metrics {
namespace {

void check_selection(const AllocationResult& result, std::size_t n,
                     std::size_t k) {
  if (k == 0) throw PreconditionError("k must be positive");
  if (result.outcomes.size() != n) {
    throw StructuralError(fmt::format("{} outcomes but ground truth covers {}",
                                      result.outcomes.size(), n));
  }
  if (result.selected_count() != k) {
    throw StructuralError(fmt::format("{} individuals selected, expected {}",
                                      result.selected_count(), k));
  }
}

}  // namespace

double utility(const AllocationResult& result, const UtilityGroundTruth& truth,
               std::size_t k) {
  if (!truth.realized) {
    throw UnsupportedMetricError("utility needs realized outcomes");
  }
  const auto& realized = *truth.realized;
  check_selection(result, realized.size(), k);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < realized.size(); ++i) {
    if (result.outcomes[i] == 1 && realized[i] == 1) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

double expected_utility(const AllocationResult& result,
                        const UtilityGroundTruth& truth, std::size_t k) {
  if (!truth.probabilities) {
    throw UnsupportedMetricError("expected utility needs probabilities");
  }
  const auto& p = *truth.probabilities;
  check_selection(result, p.size(), k);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (result.outcomes[i] == 1) sum += p[i];
  }
  return sum / static_cast<double>(k);
}

EnsembleOutcomes EnsembleOutcomes::from_rows(
    const std::vector<std::vector<std::uint8_t>>& rows) {
  if (rows.empty()) throw StructuralError("no decision-maker rows");
  EnsembleOutcomes out(rows.front().size());
  for (const auto& r : rows) out.add_row(r);
  return out;
}

void EnsembleOutcomes::add_row(std::span<const std::uint8_t> outcomes) {
  if (outcomes.size() != n_) {
    throw StructuralError(
        fmt::format("row has {} entries, expected {}", outcomes.size(), n_));
  }
  for (auto o : outcomes) {
    if (o > 1) throw StructuralError("outcome is not binary");
  }
  data_.insert(data_.end(), outcomes.begin(), outcomes.end());
  ++m_;
}

std::vector<std::uint8_t> EnsembleOutcomes::excluded_everywhere() const {
  std::vector<std::uint8_t> excluded(n_, 1);
  for (std::size_t j = 0; j < m_; ++j) {
    const auto r = row(j);
    for (std::size_t i = 0; i < n_; ++i) {
      if (r[i] == 1) excluded[i] = 0;
    }
  }
  return excluded;
}

double exclusion_rate(const EnsembleOutcomes& outcomes) {
  if (outcomes.m() == 0) throw PreconditionError("no decision-makers");
  if (outcomes.n() == 0) throw PreconditionError("no individuals");
  const auto excluded = outcomes.excluded_everywhere();
  const auto count = std::count(excluded.begin(), excluded.end(), 1);
  return static_cast<double>(count) / static_cast<double>(outcomes.n());
}

double ser(const EnsembleOutcomes& outcomes) {
  if (outcomes.m() <= 1) {
    throw PreconditionError(fmt::format(
        "systemic exclusion needs m > 1 decision-makers, got {}",
        outcomes.m()));
  }
  return exclusion_rate(outcomes);
}

double expected_ser(const std::vector<std::vector<double>>& inclusion) {
  if (inclusion.empty() || inclusion.front().empty()) {
    throw PreconditionError("expected_ser needs a non-empty matrix");
  }
  const std::size_t n = inclusion.front().size();
  std::vector<double> excluded(n, 1.0);
  for (const auto& row : inclusion) {
    if (row.size() != n) throw StructuralError("ragged inclusion matrix");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(row[i] >= 0.0 && row[i] <= 1.0)) {
        throw StructuralError("inclusion probability outside [0, 1]");
      }
      excluded[i] *= 1.0 - row[i];
    }
  }
  double sum = 0.0;
  for (double e : excluded) sum += e;
  return sum / static_cast<double>(n);
}

double utility_delta(double baseline, double value, DeltaMode mode) {
  const double diff = baseline - value;
  if (mode == DeltaMode::kAbsolute) return diff;
  if (baseline == 0.0) {
    throw PreconditionError("relative utility delta with a zero baseline");
  }
  return diff / baseline;
}

std::vector<FrontierPoint> frontier(std::vector<FrontierPoint> points,
                                    double bin_width) {
  if (!(bin_width > 0.0)) throw ConfigError("frontier bin width must be > 0");
  std::map<long long, FrontierPoint> best;
  for (auto& p : points) {
    const auto bin =
        static_cast<long long>(std::floor(p.utility_delta / bin_width));
    auto it = best.find(bin);
    if (it == best.end()) {
      best.emplace(bin, std::move(p));
    } else if (p.ser < it->second.ser ||
               (p.ser == it->second.ser &&
                p.utility_delta < it->second.utility_delta)) {
      it->second = std::move(p);
    }
  }
  std::vector<FrontierPoint> sorted;
  sorted.reserve(best.size());
  for (auto& [bin, p] : best) sorted.push_back(std::move(p));
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const FrontierPoint& a, const FrontierPoint& b) {
                     return a.utility_delta < b.utility_delta;
                   });
  std::vector<FrontierPoint> out;
  double lowest = std::numeric_limits<double>::infinity();
  for (auto& p : sorted) {
    if (p.ser < lowest) {
      lowest = p.ser;
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace randalloc::metrics

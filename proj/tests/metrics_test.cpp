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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles/enumeration.hpp"
#include "randalloc/core/errors.hpp"
#include "randalloc/lottery/lottery.hpp"
#include "randalloc/metrics/metrics.hpp"

namespace randalloc::metrics {
namespace {

AllocationResult selection(std::vector<std::uint8_t> outcomes) {
  AllocationResult r;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i]) r.selected_order.push_back(i);
  }
  r.outcomes = std::move(outcomes);
  return r;
}

TEST_CASE("utility is the precision of the selection") {
  UtilityGroundTruth truth;
  truth.realized = std::vector<std::uint8_t>{1, 1, 0, 1, 0, 0};
  CHECK(utility(selection({1, 1, 1, 1, 0, 0}), truth, 4) == 0.75);
  CHECK(utility(selection({1, 1, 0, 1, 0, 0}), truth, 3) == 1.0);
  CHECK_THROWS_AS(utility(selection({1, 1, 0, 1, 0, 0}), truth, 2),
                  StructuralError);

  UtilityGroundTruth no_realized;
  no_realized.probabilities = std::vector<double>(6, 0.5);
  CHECK_THROWS_AS(utility(selection({1, 0, 0, 0, 0, 0}), no_realized, 1),
                  UnsupportedMetricError);
}

TEST_CASE("expected utility averages selected probabilities") {
  UtilityGroundTruth truth;
  truth.probabilities = std::vector<double>{1, 1, 0, 0};
  CHECK(expected_utility(selection({1, 1, 0, 0}), truth, 2) == 1.0);

  UtilityGroundTruth flat;
  flat.probabilities = std::vector<double>(5, 0.3);
  CHECK(expected_utility(selection({0, 1, 0, 1, 1}), flat, 3) ==
        doctest::Approx(0.3));
  CHECK(expected_utility(selection({1, 0, 0, 0, 0}), flat, 1) ==
        doctest::Approx(0.3));

  UtilityGroundTruth realized_only;
  realized_only.realized = std::vector<std::uint8_t>{1, 0};
  CHECK_THROWS_AS(expected_utility(selection({1, 0}), realized_only, 1),
                  UnsupportedMetricError);
}

TEST_CASE("identical deterministic rows exclude the same people") {
  const auto row = std::vector<std::uint8_t>{1, 1, 0, 0, 0};
  const auto outcomes = EnsembleOutcomes::from_rows({row, row, row});
  CHECK(ser(outcomes) == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("a row selecting everyone zeroes the exclusion rate") {
  const auto outcomes = EnsembleOutcomes::from_rows(
      {{1, 0, 0}, {1, 1, 1}});
  CHECK(ser(outcomes) == 0.0);
}

TEST_CASE("SER needs more than one decision-maker") {
  const auto one = EnsembleOutcomes::from_rows({{1, 0, 0}});
  CHECK_THROWS_AS(ser(one), PreconditionError);
  CHECK(exclusion_rate(one) == doctest::Approx(2.0 / 3.0));
  EnsembleOutcomes ragged(3);
  CHECK_THROWS_AS(ragged.add_row(std::vector<std::uint8_t>{1, 0}),
                  StructuralError);
  CHECK_THROWS_AS(ragged.add_row(std::vector<std::uint8_t>{1, 0, 2}),
                  StructuralError);
}

TEST_CASE("two independent single-slot BF lotteries: SER matches enumeration") {
  const std::vector<double> claims{0.5, 0.3, 0.2};
  const auto q = oracle::inclusion_probabilities(claims, 1);
  double exact = 0.0;
  for (double qi : q) exact += (1.0 - qi) * (1.0 - qi);
  exact /= 3.0;
  CHECK(exact == doctest::Approx(0.46).epsilon(1e-12));
  CHECK(expected_ser({q, q}) == doctest::Approx(exact).epsilon(1e-12));

  const ClaimProfile profile(claims);
  const std::size_t trials = 20000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    EnsembleOutcomes outcomes(3);
    for (std::uint64_t j = 0; j < 2; ++j) {
      RandomSource rng(t, j);
      outcomes.add_row(lottery::bf_lottery(profile, 1, rng).result.outcomes);
    }
    const double s = ser(outcomes);
    sum += s;
    sum_sq += s * s;
  }
  const double mean = sum / trials;
  const double sd = std::sqrt(sum_sq / trials - mean * mean);
  CHECK(std::abs(mean - exact) <= 3.0 * sd / std::sqrt(trials));
}

TEST_CASE("expected_ser edge values") {
  CHECK(expected_ser({{1, 1, 1}, {1, 1, 1}}) == 0.0);
  CHECK(expected_ser({{0, 0}, {0, 0}, {0, 0}}) == 1.0);
  CHECK_THROWS_AS(expected_ser({{0.5, 0.5}, {0.5}}), StructuralError);
  CHECK_THROWS_AS(expected_ser({{1.5}}), StructuralError);
}

TEST_CASE("adding a decision-maker never raises SER") {
  RandomSource gen(6);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + gen.below(20);
    EnsembleOutcomes outcomes(n);
    double previous = 1.0;
    for (int j = 0; j < 5; ++j) {
      std::vector<std::uint8_t> row(n);
      for (auto& o : row) o = gen.uniform() < 0.3 ? 1 : 0;
      outcomes.add_row(row);
      const double current = exclusion_rate(outcomes);
      CHECK(current <= previous);
      CHECK(current >= 0.0);
      previous = current;
    }
  }
}

TEST_CASE("top-k maximizes expected utility over every k-subset") {
  RandomSource gen(10);
  for (std::size_t n = 1; n <= 12; ++n) {
    std::vector<double> p(n);
    for (auto& v : p) v = gen.uniform();
    UtilityGroundTruth truth;
    truth.probabilities = p;
    const ClaimProfile profile(p);
    for (std::size_t k = 1; k <= n; ++k) {
      const double top = expected_utility(lottery::top_k(profile, k), truth, k);
      double best = 0.0;
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        std::vector<std::uint8_t> o(n);
        for (std::size_t i = 0; i < n; ++i) o[i] = (mask >> i) & 1u;
        best = std::max(best, expected_utility(selection(o), truth, k));
      }
      CHECK(top == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("utility_delta modes") {
  CHECK(utility_delta(0.7, 0.65) == doctest::Approx(0.05));
  CHECK(utility_delta(0.5, 0.45, DeltaMode::kRelative) == doctest::Approx(0.1));
  CHECK_THROWS_AS(utility_delta(0.0, 0.1, DeltaMode::kRelative),
                  PreconditionError);
}

TEST_CASE("frontier keeps Pareto-minimal points") {
  const FrontierPoint single{0.01, 0.5, {}, "a"};
  const auto one = frontier({single});
  REQUIRE(one.size() == 1);
  CHECK(one[0].label == "a");

  const auto pruned = frontier({{0.0, 0.70, {}, "topk"},
                                {0.012, 0.55, {}, "good"},
                                {0.03, 0.60, {}, "dominated"},
                                {0.013, 0.58, {}, "same-bin-worse"},
                                {0.05, 0.40, {}, "aggressive"}});
  REQUIRE(pruned.size() == 3);
  CHECK(pruned[0].label == "topk");
  CHECK(pruned[1].label == "good");
  CHECK(pruned[2].label == "aggressive");
  CHECK_THROWS_AS(frontier({}, 0.0), ConfigError);
}

}  // namespace
}  // namespace randalloc::metrics

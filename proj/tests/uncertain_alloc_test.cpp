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

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles/enumeration.hpp"
#include "randalloc/core/compliance.hpp"
#include "randalloc/core/errors.hpp"
#include "randalloc/core/log.hpp"
#include "randalloc/lottery/lottery.hpp"
#include "randalloc/metrics/metrics.hpp"
#include "randalloc/predict/synthetic.hpp"
#include "randalloc/uncertain_alloc/mechanisms.hpp"
#include "randalloc/uncertain_alloc/protocol.hpp"

namespace randalloc::uncertain {
namespace {

ClaimProfile random_scores(std::size_t n, RandomSource& gen) {
  std::vector<double> s(n);
  for (auto& v : s) v = gen.uniform();
  return ClaimProfile(std::move(s));
}

void check_same_as_topk(const UncertainAllocationReport& report,
                        const ClaimProfile& scores, std::size_t k) {
  const auto expected = lottery::top_k(scores, k);
  CHECK(report.allocation.outcomes == expected.outcomes);
  CHECK(report.allocation.selected_order == expected.selected_order);
  CHECK(report.k_prime == 0);
}

// ---------------------------------------------------------------------------
// Decision boundary

TEST_CASE("boundary randomization with k' = 0 is top-k") {
  RandomSource gen(1);
  const auto scores = random_scores(40, gen);
  LotteryConfig cfg{.k = 10, .n = 40, .k_prime = 0, .n_prime = 0,
                    .mechanism = Mechanism::kDecisionBoundary};
  RandomSource rng(2);
  check_same_as_topk(boundary_randomize(scores, cfg, rng), scores, 10);
}

TEST_CASE("boundary band follows the canonical tie-break") {
  // Ties at 0.5 straddle the cut; ids decide who is fixed and who is banded.
  const ClaimProfile scores({0.9, 0.5, 0.5, 0.5, 0.5, 0.1}, {10, 4, 3, 2, 1, 0});
  LotteryConfig cfg{.k = 3, .n = 6, .k_prime = 1, .n_prime = 2,
                    .mechanism = Mechanism::kDecisionBoundary};
  // Canonical order: 10, 1, 2, 3, 4, 0 -> fixed {10, 1}, band {2, 3}.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RandomSource rng(seed);
    const auto report = boundary_randomize(scores, cfg, rng);
    const auto& order = report.allocation.selected_order;
    REQUIRE(order.size() == 3);
    CHECK(order[0] == 10);
    CHECK(order[1] == 1);
    CHECK((order[2] == 2 || order[2] == 3));
  }
}

// ---------------------------------------------------------------------------
// Variance

TEST_CASE("zero-variance ensemble reproduces top-k") {
  RandomSource gen(3);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 5 + gen.below(60);
    const std::size_t k = 1 + gen.below(n);
    // Coarse scores force ties at the cut.
    std::vector<double> s(n);
    for (auto& v : s) v = static_cast<double>(gen.below(6)) / 5.0;
    const ClaimProfile scores(s);
    predict::BootstrapEnsemble e;
    e.predictions = predict::Matrix(4, n);
    for (std::size_t m = 0; m < 4; ++m) {
      for (std::size_t i = 0; i < n; ++i) e.predictions(m, i) = s[i];
    }
    RandomSource rng(rep);
    const auto report =
        variance_randomize(scores, e, predict::VoteRule::kMainThreshold, k, rng);
    const auto expected = lottery::top_k(scores, k);
    CHECK(report.allocation.outcomes == expected.outcomes);
    CHECK(report.allocation.selected_order == expected.selected_order);
    CHECK(report.n_prime == 0);
  }
}

TEST_CASE("equal partial votes share one slot evenly") {
  const ClaimProfile scores({0.9, 0.8, 0.1});
  const std::vector<double> votes{0.5, 0.5, 0.0};
  const std::size_t trials = 20000;
  std::size_t first = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    RandomSource rng(t);
    const auto report = variance_randomize(scores, votes, 2, 1, rng);
    CHECK(report.allocation.outcomes[2] == 0);
    first += report.allocation.outcomes[0];
    CHECK(report.k_prime == 1);
    CHECK(report.n_prime == 2);
  }
  const double sd = std::sqrt(0.25 / trials);
  CHECK(std::abs(static_cast<double>(first) / trials - 0.5) < 3.0 * sd);
}

TEST_CASE("lottery slots are weighted by vote fraction") {
  const ClaimProfile scores({0.9, 0.8, 0.7, 0.6});
  const std::vector<double> votes{1.0, 0.75, 0.25, 0.5};
  // One fixed slot, then two draws from {1, 2, 3} with weights .75/.25/.5.
  const auto exact = oracle::inclusion_probabilities({0.75, 0.25, 0.5}, 2);
  const std::size_t trials = 40000;
  std::vector<double> hits(4, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    RandomSource rng(t);
    const auto report = variance_randomize(scores, votes, 4, 3, rng);
    for (std::size_t i = 0; i < 4; ++i) hits[i] += report.allocation.outcomes[i];
  }
  CHECK(hits[0] == trials);
  for (std::size_t i = 0; i < 3; ++i) {
    const double q = exact[i];
    CHECK(std::abs(hits[i + 1] / trials - q) <=
          3.0 * oracle::binomial_sigma(q, trials) + 1e-12);
  }
}

TEST_CASE("unanimous individuals always win, zero-vote individuals never") {
  logger().set_level(spdlog::level::err);
  RandomSource gen(4);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 2 + gen.below(30);
    const std::size_t k = 1 + gen.below(n);
    const std::size_t members = 1 + gen.below(11);
    const auto scores = random_scores(n, gen);
    std::vector<double> votes(n);
    std::size_t unanimous = 0;
    for (auto& v : votes) {
      v = static_cast<double>(gen.below(members + 1)) / static_cast<double>(members);
      unanimous += v == 1.0;
    }
    RandomSource rng(rep);
    const auto report = variance_randomize(scores, votes, members, k, rng);
    CHECK(report.allocation.selected_count() == k);
    for (std::size_t i = 0; i < n; ++i) {
      if (votes[i] == 1.0 && unanimous <= k) CHECK(report.allocation.outcomes[i] == 1);
      if (votes[i] == 0.0 && report.score_filled == 0) {
        CHECK(report.allocation.outcomes[i] == 0);
      }
    }
    CHECK(report.k_prime <= k);
    CHECK(report.n_prime <= n);
  }
  logger().set_level(spdlog::level::warn);
}

TEST_CASE("unanimous overflow keeps the best main scores") {
  const ClaimProfile scores({0.2, 0.9, 0.5, 0.7, 0.1});
  const std::vector<double> votes(5, 1.0);
  RandomSource rng(5);
  const auto report = variance_randomize(scores, votes, 11, 3, rng);
  CHECK(report.demoted == 2);
  CHECK(report.allocation.outcomes == std::vector<std::uint8_t>{0, 1, 1, 1, 0});
  CHECK(report.k_prime == 0);
}

TEST_CASE("an empty pool falls back to main scores") {
  const ClaimProfile scores({0.9, 0.8, 0.7, 0.6});
  const std::vector<double> votes{1.0, 0.0, 0.0, 0.0};
  RandomSource rng(6);
  const auto report = variance_randomize(scores, votes, 3, 2, rng);
  CHECK(report.score_filled == 1);
  CHECK(report.allocation.outcomes == std::vector<std::uint8_t>{1, 1, 0, 0});
  CHECK_THROWS_AS(variance_randomize(scores, std::vector<double>{1.0}, 3, 2, rng),
                  StructuralError);
  CHECK_THROWS_AS(variance_randomize(scores, votes, 3, 5, rng), ConfigError);
}

// ---------------------------------------------------------------------------
// Outliers

TEST_CASE("no flagged outliers is top-k") {
  RandomSource gen(7);
  const auto scores = random_scores(50, gen);
  const std::vector<double> p(50, 0.9);
  for (auto mode : {OutlierMode::kUnweightedPool, OutlierMode::kWeightedPool}) {
    RandomSource rng(8);
    const auto report = outlier_randomize(scores, p, 0.2, 12, mode, rng);
    check_same_as_topk(report, scores, 12);
    CHECK(report.n_prime == 0);
  }
}

TEST_CASE("outliers lose their fixed slots, non-outliers keep theirs") {
  RandomSource gen(9);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 3 + gen.below(40);
    const std::size_t k = 1 + gen.below(n);
    const auto scores = random_scores(n, gen);
    std::vector<double> p(n);
    for (auto& v : p) v = gen.uniform();
    const auto order = canonical_order(scores);
    std::size_t flagged_top = 0;
    std::size_t flagged = 0;
    for (std::size_t r = 0; r < n; ++r) {
      flagged += p[order[r]] <= 0.3;
      if (r < k) flagged_top += p[order[r]] <= 0.3;
    }
    RandomSource rng(rep);
    const auto report =
        outlier_randomize(scores, p, 0.3, k, OutlierMode::kUnweightedPool, rng);
    CHECK(report.k_prime == flagged_top);
    CHECK(report.n_prime == flagged);
    CHECK(report.allocation.selected_count() == k);
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t i = order[r];
      if (r < k && p[i] > 0.3) CHECK(report.allocation.outcomes[i] == 1);
      if (r >= k && p[i] > 0.3) CHECK(report.allocation.outcomes[i] == 0);
    }
  }
}

TEST_CASE("everyone flagged is a uniform lottery") {
  const std::size_t n = 12;
  const std::size_t k = 3;
  RandomSource gen(10);
  const auto scores = random_scores(n, gen);
  const std::vector<double> p(n, 0.01);
  const std::size_t trials = 20000;
  std::vector<double> hits(n, 0.0);
  double ser_sum = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    metrics::EnsembleOutcomes outcomes(n);
    for (std::uint64_t j = 0; j < 2; ++j) {
      RandomSource rng(t, j);
      const auto report =
          outlier_randomize(scores, p, 0.2, k, OutlierMode::kUnweightedPool, rng);
      CHECK(report.k_prime == k);
      outcomes.add_row(report.allocation.outcomes);
      if (j == 0) {
        for (std::size_t i = 0; i < n; ++i) hits[i] += report.allocation.outcomes[i];
      }
    }
    ser_sum += metrics::ser(outcomes);
  }
  const double q = static_cast<double>(k) / n;
  for (double h : hits) {
    CHECK(std::abs(h / trials - q) <= 3.0 * oracle::binomial_sigma(q, trials));
  }
  // Two independent uniform draws: SER = (1 - k/n)^2. Per-trial SER has
  // variance below 1/(4n), which bounds the Monte Carlo error.
  const double expected = (1.0 - q) * (1.0 - q);
  CHECK(std::abs(ser_sum / trials - expected) < 3.0 * std::sqrt(0.25 / n / trials));
}

TEST_CASE("weighted outlier pool follows score weights") {
  const ClaimProfile scores({0.95, 0.9, 0.6, 0.4, 0.2});
  const std::vector<double> p{0.05, 0.9, 0.1, 0.05, 0.5};
  // k = 2: id 0 is flagged (k' = 1), id 1 is fixed. Pool {0, 2, 3}.
  const auto exact = oracle::inclusion_probabilities({0.95, 0.6, 0.4}, 1);
  const std::size_t trials = 30000;
  std::vector<double> hits(5, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    RandomSource rng(t);
    const auto report =
        outlier_randomize(scores, p, 0.2, 2, OutlierMode::kWeightedPool, rng);
    for (std::size_t i = 0; i < 5; ++i) hits[i] += report.allocation.outcomes[i];
  }
  CHECK(hits[1] == trials);
  CHECK(hits[4] == 0.0);
  const std::size_t pool[3] = {0, 2, 3};
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::abs(hits[pool[j]] / trials - exact[j]) <=
          3.0 * oracle::binomial_sigma(exact[j], trials));
  }
}

TEST_CASE("matched boundary configuration") {
  UncertainAllocationReport r;
  r.k = 10;
  r.n = 40;
  r.k_prime = 0;
  CHECK(matched_boundary_config(r).mechanism == Mechanism::kTopK);
  r.k_prime = 4;
  r.n_prime = 12;
  auto cfg = matched_boundary_config(r);
  CHECK(cfg.k_prime == 4);
  CHECK(cfg.n_prime == 12);
  r.n_prime = 4;
  CHECK(matched_boundary_config(r).n_prime == 5);
  r.n_prime = 39;
  CHECK(matched_boundary_config(r).n_prime == 34);
  CHECK(parse_outlier_mode("weighted") == OutlierMode::kWeightedPool);
  CHECK_THROWS_AS(parse_outlier_mode("loud"), ConfigError);
}

// ---------------------------------------------------------------------------
// Protocol and study

struct SmallData {
  predict::TabularDataset data =
      predict::ingest(predict::synthetic_job_seekers(800, 21), predict::job_seeker_schema());
};

ProtocolConfig small_protocol() {
  ProtocolConfig cfg;
  cfg.model = predict::ModelSpec::defaults(predict::ModelKind::kDecisionTree);
  cfg.repetitions = 2;
  cfg.iterations = 6;
  cfg.seed = 3;
  cfg.threads = 1;
  cfg.ensemble.members = 5;
  return cfg;
}

TEST_CASE("protocol: top-k is deterministic across iterations") {
  SmallData d;
  const auto result = run_protocol(d.data, small_protocol());
  const auto& topk = result.summary(Method::kTopK);
  // An id can sit in both test folds, so counts come in whole repetitions.
  for (const auto& f : result.frequencies[0]) {
    CHECK(f.draws % 6 == 0);
    CHECK(f.selected % 6 == 0);
  }
  CHECK(topk.kprime_rate.mean == 0.0);
  CHECK(result.methods.size() == 4);
  CHECK(result.repetitions.size() == 2);
  CHECK(result.predictions.size() == 2 * result.repetitions[0].pool);
  for (const auto& row : result.predictions) {
    REQUIRE(row.vote_fraction.has_value());
    REQUIRE(row.p_value.has_value());
  }
  const auto& boundary = result.summary(Method::kBoundary);
  CHECK(boundary.kprime_rate.mean == doctest::Approx(0.5).epsilon(0.02));
  CHECK(boundary.expected_utility.has_value());
}

TEST_CASE("protocol: reproducible and thread-count independent") {
  SmallData d;
  auto cfg = small_protocol();
  cfg.model = predict::ModelSpec::defaults(predict::ModelKind::kRandomForest);
  const auto a = run_protocol(d.data, cfg);
  cfg.threads = 3;
  const auto b = run_protocol(d.data, cfg);
  for (std::size_t i = 0; i < a.methods.size(); ++i) {
    CHECK(a.methods[i].utility.mean == b.methods[i].utility.mean);
    CHECK(a.methods[i].utility_boundary_matched.mean ==
          b.methods[i].utility_boundary_matched.mean);
    CHECK(a.methods[i].kprime_rate.mean == b.methods[i].kprime_rate.mean);
  }
}

TEST_CASE("protocol: retraining the ensemble per iteration still runs") {
  SmallData d;
  auto cfg = small_protocol();
  cfg.iterations = 2;
  cfg.repetitions = 1;
  cfg.retrain_ensemble = true;
  cfg.methods = {Method::kVariance};
  const auto result = run_protocol(d.data, cfg);
  CHECK(result.methods.size() == 2);
  CHECK(result.summary(Method::kVariance).utility.mean > 0.0);
  CHECK_THROWS_AS(result.summary(Method::kOutlier), PreconditionError);
}

TEST_CASE("study: top-k SER and frontiers") {
  SmallData d;
  StudyConfig study;
  study.protocol = small_protocol();
  study.protocol.repetitions = 1;
  study.protocol.iterations = 4;
  study.protocol.model = predict::ModelSpec::defaults(predict::ModelKind::kLogisticRegression);
  study.m = 3;
  study.boundary_kprime_rates = {0.25, 0.5, 1.0};
  const auto result = ser_tradeoff_study(d.data, study);
  const auto topk = std::find_if(result.points.begin(), result.points.end(),
                                 [](const StudyPoint& p) { return p.method == Method::kTopK; });
  REQUIRE(topk != result.points.end());
  // 160 pool rows, k = 40.
  CHECK(topk->ser == 0.75);
  CHECK(topk->utility_delta == 0.0);
  // k' = k with n' = k is not a valid band and is skipped.
  CHECK(std::count_if(result.points.begin(), result.points.end(), [](const StudyPoint& p) {
          return p.method == Method::kBoundary;
        }) == 2);
  CHECK(result.frontiers.size() == 3);
  for (const auto& [key, front] : result.frontiers) {
    REQUIRE_FALSE(front.empty());
    for (std::size_t i = 1; i < front.size(); ++i) CHECK(front[i].ser < front[i - 1].ser);
  }
  for (const auto& p : result.points) {
    if (p.method != Method::kTopK && p.kprime_rate > 0.0) CHECK(p.ser < topk->ser);
  }

  study.m = 1;
  CHECK_THROWS_AS(ser_tradeoff_study(d.data, study), PreconditionError);
}

}  // namespace
}  // namespace randalloc::uncertain

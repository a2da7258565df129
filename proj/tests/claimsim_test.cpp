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
#include <numbers>
#include <vector>

#include "doctest.h"
#include "randalloc/claimsim/distributions.hpp"
#include "randalloc/claimsim/simulation.hpp"
#include "randalloc/core/errors.hpp"

namespace randalloc::claimsim {
namespace {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
};

Moments moments(std::span<const double> xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.sd += (x - m.mean) * (x - m.mean);
  m.sd = std::sqrt(m.sd / static_cast<double>(xs.size() - 1));
  std::vector<double> sorted(xs.begin(), xs.end());
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                   sorted.end());
  m.median = sorted[sorted.size() / 2];
  return m;
}

double phi(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}
double Phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Moments sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
  RandomSource rng(seed);
  const auto profile = sample_claims(spec, n, rng);
  for (double c : profile.claims()) {
    REQUIRE(c >= 0.0);
    REQUIRE(c <= 1.0);
  }
  return moments(profile.claims());
}

constexpr std::size_t kDraws = 200000;

TEST_CASE("uniform claims") {
  const auto m = sample({Family::kUniform}, kDraws, 1);
  const double se = std::sqrt(1.0 / 12.0 / kDraws);
  CHECK(std::abs(m.mean - 0.5) < 4.0 * se);
  CHECK(m.sd == doctest::Approx(std::sqrt(1.0 / 12.0)).epsilon(0.01));
}

TEST_CASE("normal claims follow the truncated normal") {
  const double sigma = 0.15;
  const double beta = 0.5 / sigma;
  // Mass lost to truncation is tiny at sigma = 0.15.
  CHECK(2.0 * (1.0 - Phi(beta)) < 1e-3);
  const double var =
      sigma * sigma * (1.0 - 2.0 * beta * phi(beta) / (2.0 * Phi(beta) - 1.0));
  const auto m = sample(DistributionSpec::standard(Family::kNormal), kDraws, 2);
  CHECK(std::abs(m.mean - 0.5) < 4.0 * std::sqrt(var / kDraws));
  CHECK(m.sd == doctest::Approx(std::sqrt(var)).epsilon(0.01));
}

TEST_CASE("inverted normal claims are bimodal") {
  RandomSource rng(3);
  const auto profile =
      sample_claims(DistributionSpec::standard(Family::kInvertedNormal), kDraws, rng);
  std::size_t middle = 0;
  std::size_t low = 0;
  for (double c : profile.claims()) {
    if (c > 0.25 && c < 0.75) ++middle;
    if (c < 0.5) ++low;
  }
  // Both components are symmetric, so the middle band holds the same share
  // of each truncated half-normal.
  const double s = 0.15;
  const double expected_middle =
      (Phi(0.75 / s) - Phi(0.25 / s)) / (Phi(1.0 / s) - 0.5);
  CHECK(static_cast<double>(middle) / kDraws ==
        doctest::Approx(expected_middle).epsilon(0.05));
  CHECK(static_cast<double>(low) / kDraws == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("pareto claims carry more weak claims") {
  // 1 - u^(1/2): median 1 - 2^(-1/2), mean 1/3.
  const auto m = sample(DistributionSpec::standard(Family::kPareto), kDraws, 4);
  CHECK(m.median < m.mean);
  CHECK(m.median == doctest::Approx(1.0 - std::sqrt(0.5)).epsilon(0.01));
  CHECK(m.mean == doctest::Approx(1.0 / 3.0).epsilon(0.01));

  const auto inv = sample(DistributionSpec::standard(Family::kInvertedPareto), kDraws, 5);
  CHECK(inv.median > inv.mean);
  CHECK(inv.mean == doctest::Approx(2.0 / 3.0).epsilon(0.01));
}

TEST_CASE("distribution parsing") {
  CHECK(DistributionSpec::parse("normal").param == 0.15);
  CHECK(DistributionSpec::parse("pareto:3").param == 3.0);
  CHECK(DistributionSpec::parse("inverted_normal:0.1").label() ==
        "inverted_normal:0.1");
  CHECK_THROWS_AS(DistributionSpec::parse("gamma"), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::parse("normal:-1"), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::parse("normal:x"), ConfigError);
}

TEST_CASE("decision-maker noise") {
  const ClaimProfile flat(std::vector<double>(kDraws, 0.5));
  RandomSource rng(7);
  const auto same = add_decision_maker_noise(flat, 0.0, rng);
  CHECK(std::equal(same.claims().begin(), same.claims().end(),
                   flat.claims().begin()));

  const auto noisy = add_decision_maker_noise(flat, 0.025, rng);
  const auto m = moments(noisy.claims());
  CHECK(m.sd == doctest::Approx(0.025).epsilon(0.05));
  CHECK(std::abs(m.mean - 0.5) < 4.0 * 0.025 / std::sqrt(kDraws));

  const ClaimProfile edges(std::vector<double>{0.0, 1.0, 0.0, 1.0});
  const auto clipped = add_decision_maker_noise(edges, 0.5, rng);
  for (double c : clipped.claims()) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
  CHECK_THROWS_AS(add_decision_maker_noise(flat, -0.1, rng), ConfigError);
}

TEST_CASE("mechanism specs resolve against n and k") {
  const auto spec = MechanismSpec::parse("partial_bf:0.5:0.25");
  const auto cfg = spec.resolve(1000, 250);
  CHECK(cfg.k_prime == 125);
  CHECK(cfg.n_prime == 250);
  CHECK(MechanismSpec::parse(spec.label()).kprime_rate == 0.5);
  CHECK(MechanismSpec::parse("bf").label() == "bf");
  CHECK_THROWS_AS(MechanismSpec::parse("partial_bf:0.5"), ConfigError);
  CHECK_THROWS_AS(MechanismSpec::parse("bf:0.5:0.5"), ConfigError);
  // n' must exceed k'.
  CHECK_THROWS_AS(MechanismSpec::parse("partial_bf:1.0:0.1").resolve(1000, 250),
                  ConfigError);
  CHECK_THROWS_AS(MechanismSpec::parse("variance").resolve(10, 2), ConfigError);
}

SimulationConfig small_config() {
  SimulationConfig cfg;
  cfg.n = 200;
  cfg.selection_rate = 0.25;
  cfg.iterations = 60;
  cfg.m = 4;
  cfg.threads = 1;
  return cfg;
}

TEST_CASE("noise-free top-k excludes the same people every time") {
  auto cfg = small_config();
  cfg.mechanisms = {MechanismSpec{Mechanism::kTopK}};
  const auto result =
      run_simulation(cfg, DistributionSpec::standard(Family::kNormal), 11);
  for (std::size_t m = 2; m <= cfg.m; ++m) {
    CHECK(result.top_k.ser(m).mean == 0.75);
    CHECK(result.top_k.ser(m).std_error == 0.0);
  }
  REQUIRE(result.mechanisms.size() == 1);
  CHECK(result.mechanisms[0].utility_delta.mean == 0.0);
  CHECK(result.mechanisms[0].exclusion_reduction_by_m[3].mean == 0.0);
}

TEST_CASE("a single decision-maker has no SER") {
  auto cfg = small_config();
  cfg.m = 1;
  const auto result = run_simulation(cfg, {Family::kUniform}, 1);
  CHECK_FALSE(result.top_k.ser_defined());
  CHECK_THROWS_AS(result.top_k.ser(1), PreconditionError);
  CHECK(result.top_k.exclusion_by_m.size() == 1);
}

TEST_CASE("weighted lotteries lower SER at a utility cost") {
  auto cfg = small_config();
  cfg.noise_sigma = 0.025;
  cfg.mechanisms = {MechanismSpec{Mechanism::kBF},
                    MechanismSpec{Mechanism::kUnweighted}};
  const auto result =
      run_simulation(cfg, DistributionSpec::standard(Family::kNormal), 12);
  const auto& bf = result.mechanisms[0];
  const auto& uniform = result.mechanisms[1];
  for (std::size_t m = 2; m <= cfg.m; ++m) {
    CHECK(bf.ser(m).mean < result.top_k.ser(m).mean);
    CHECK(uniform.ser(m).mean < bf.ser(m).mean);
  }
  CHECK(bf.utility_delta.mean > 0.0);
  CHECK(uniform.utility_delta.mean > bf.utility_delta.mean);
  // Uniform lottery SER is (1 - k/n)^m in expectation.
  CHECK(uniform.ser(3).mean ==
        doctest::Approx(std::pow(0.75, 3)).epsilon(0.02));
}

TEST_CASE("results do not depend on the thread count") {
  auto cfg = small_config();
  cfg.noise_sigma = 0.05;
  cfg.mechanisms = {MechanismSpec{Mechanism::kBF},
                    MechanismSpec::parse("partial_bf:0.5:0.5")};
  const auto dist = DistributionSpec::standard(Family::kPareto);
  const auto one = run_simulation(cfg, dist, 99);
  cfg.threads = 3;
  const auto three = run_simulation(cfg, dist, 99);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < cfg.m; ++j) {
      CHECK(one.mechanisms[i].exclusion_by_m[j].mean ==
            three.mechanisms[i].exclusion_by_m[j].mean);
      CHECK(one.mechanisms[i].exclusion_by_m[j].std_error ==
            three.mechanisms[i].exclusion_by_m[j].std_error);
    }
    CHECK(one.mechanisms[i].expected_utility.mean ==
          three.mechanisms[i].expected_utility.mean);
  }
}

TEST_CASE("lottery draws do not depend on the other mechanisms in the run") {
  auto cfg = small_config();
  cfg.noise_sigma = 0.025;
  cfg.mechanisms = {MechanismSpec{Mechanism::kBF}};
  const auto dist = DistributionSpec::standard(Family::kNormal);
  const auto alone = run_simulation(cfg, dist, 5);
  cfg.mechanisms = {MechanismSpec{Mechanism::kUnweighted},
                    MechanismSpec{Mechanism::kBF}};
  const auto shared = run_simulation(cfg, dist, 5);
  CHECK(alone.mechanisms[0].ser(4).mean == shared.mechanisms[1].ser(4).mean);
}

TEST_CASE("sequential mode without benefit matches concurrent mode") {
  auto cfg = small_config();
  cfg.noise_sigma = 0.025;
  cfg.mechanisms = {MechanismSpec{Mechanism::kBF}};
  const auto dist = DistributionSpec::standard(Family::kNormal);
  const auto concurrent = run_simulation(cfg, dist, 21);
  cfg.mode = SimulationMode::kSequential;
  const auto sequential = run_simulation(cfg, dist, 21);
  for (std::size_t j = 0; j < cfg.m; ++j) {
    CHECK(concurrent.mechanisms[0].exclusion_by_m[j].mean ==
          sequential.mechanisms[0].exclusion_by_m[j].mean);
    CHECK(concurrent.top_k.exclusion_by_m[j].mean ==
          sequential.top_k.exclusion_by_m[j].mean);
  }
  CHECK(concurrent.mechanisms[0].expected_utility.mean ==
        sequential.mechanisms[0].expected_utility.mean);
  CHECK(sequential.mechanisms[0].mean_claim_by_step.size() == cfg.m);
  CHECK(concurrent.mechanisms[0].mean_claim_by_step.empty());
}

TEST_CASE("sequential top-k locks in its first selection") {
  auto cfg = small_config();
  cfg.mode = SimulationMode::kSequential;
  cfg.benefit = 0.1;
  cfg.mechanisms = {MechanismSpec{Mechanism::kBF}};
  const auto result =
      run_simulation(cfg, DistributionSpec::standard(Family::kNormal), 31);
  for (std::size_t m = 2; m <= cfg.m; ++m) {
    CHECK(result.top_k.ser(m).mean == 0.75);
    CHECK(result.mechanisms[0].ser(m).mean < result.top_k.ser(m).mean);
  }
  // Winners gain, so the mean claim rises with every step.
  const auto& steps = result.top_k.mean_claim_by_step;
  for (std::size_t j = 1; j < steps.size(); ++j) {
    CHECK(steps[j].mean > steps[j - 1].mean);
  }
}

TEST_CASE("simulation config validation") {
  auto cfg = small_config();
  cfg.selection_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.noise_sigma = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.mechanisms = {MechanismSpec::parse("partial_bf:1.0:0.1")};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  CHECK_THROWS_AS(run_sequential(cfg, {Family::kUniform}, 1), ConfigError);
}

TEST_CASE("partial lottery sweep") {
  auto cfg = small_config();
  cfg.iterations = 30;
  cfg.m = 3;
  cfg.noise_sigma = 0.025;
  const auto sweep = sweep_partial_bf(
      cfg, DistributionSpec::standard(Family::kNormal), SweepGrid::tenths(), 8);
  const auto n = cfg.n;
  const auto k = cfg.k();
  CHECK(sweep.simulation.mechanisms.size() + sweep.skipped.size() == 100);
  CHECK_FALSE(sweep.skipped.empty());
  for (const auto& s : sweep.simulation.mechanisms) {
    CHECK(s.config.k_prime > 0);
    CHECK(s.config.k_prime < s.config.n_prime);
    CHECK(s.config.n_prime <= n - k + s.config.k_prime);
  }
  for (const auto& p : sweep.skipped) CHECK_FALSE(p.reason.empty());

  REQUIRE(sweep.frontier_by_m.size() == 2);
  for (std::size_t m = 2; m <= cfg.m; ++m) {
    const auto& front = sweep.frontier_by_m[m - 2];
    REQUIRE_FALSE(front.empty());
    // A mild partial lottery can share top-k's utility bin with lower SER.
    CHECK(front.front().utility_delta < metrics::kFrontierBinWidth);
    CHECK(front.front().ser <= sweep.simulation.top_k.ser(m).mean);
    for (std::size_t i = 1; i < front.size(); ++i) {
      CHECK(front[i].utility_delta > front[i - 1].utility_delta);
      CHECK(front[i].ser < front[i - 1].ser);
    }
  }
}

}  // namespace
}  // namespace randalloc::claimsim

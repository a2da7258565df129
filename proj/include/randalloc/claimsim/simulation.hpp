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

// Known-claims experiments with several decision-makers.
//
// Each iteration draws true claims, then m decision-makers each perceive the
// claims through independent Gaussian noise and allocate k = round(rate * n)
// resources. Expected utility is scored against the true claims (claims are
// read as success probabilities). Exclusion is tracked cumulatively, so a
// single run reports SER for every m' = 2..m.
//
// Random streams: iteration i uses RandomSource(seed, i); true claims, the
// noise of decision-maker j and the lottery of (mechanism, j) each take a
// derived stream. Lottery streams are keyed by the mechanism label, so a
// mechanism's draws do not depend on which other mechanisms share the run.
// Results are reduced in iteration order and are bit-identical for any
// thread count.

#ifndef RANDALLOC_CLAIMSIM_SIMULATION_HPP_
#define RANDALLOC_CLAIMSIM_SIMULATION_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "randalloc/claimsim/distributions.hpp"
#include "randalloc/core/types.hpp"
#include "randalloc/metrics/metrics.hpp"

namespace randalloc::claimsim {

// A mechanism expressed independently of population size.
struct MechanismSpec {
  Mechanism mechanism = Mechanism::kTopK;
  // PartialBF only: k' = round(kprime_rate * k), n' = round(nprime_rate * n).
  double kprime_rate = 0.0;
  double nprime_rate = 0.0;
  // Band of exactly n' = k, whatever the selection rate.
  bool nprime_is_k = false;

  LotteryConfig resolve(std::size_t n, std::size_t k) const;
  std::string label() const;
  // "topk", "bf", "unweighted", "partial_bf:<k'/k>:<n'/n>" or
  // "partial_bf:<k'/k>:k".
  static MechanismSpec parse(std::string_view text);
};

enum class SimulationMode { kConcurrent, kSequential };

std::string_view to_string(SimulationMode mode);
SimulationMode parse_mode(std::string_view text);

struct SimulationConfig {
  std::size_t n = 1000;
  double selection_rate = 0.25;
  std::size_t iterations = 1000;
  std::size_t m = 2;
  double noise_sigma = 0.0;
  SimulationMode mode = SimulationMode::kConcurrent;
  // Sequential mode: added to each winner's claim (clipped at 1).
  double benefit = 0.0;
  std::vector<MechanismSpec> mechanisms;
  // 0 = hardware concurrency.
  unsigned threads = 0;

  std::size_t k() const;
  void validate() const;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Mean and sample std / sqrt(count) of per-iteration values.
Estimate summarize(std::span<const double> values);

struct MechanismSummary {
  MechanismSpec spec;
  LotteryConfig config;
  // [j] = fraction excluded by every one of decision-makers 1..j+1.
  std::vector<Estimate> exclusion_by_m;
  // Paired top-k exclusion minus this mechanism's, same indexing.
  std::vector<Estimate> exclusion_reduction_by_m;
  Estimate expected_utility;
  // Paired top-k expected utility minus this mechanism's.
  Estimate utility_delta;
  // Sequential mode: population mean claim after each step.
  std::vector<Estimate> mean_claim_by_step;

  // SER is only defined with more than one decision-maker.
  bool ser_defined() const { return exclusion_by_m.size() > 1; }
  // SER across the first m decision-makers; PreconditionError when m < 2.
  const Estimate& ser(std::size_t m) const;
};

struct SimulationResult {
  SimulationConfig config;
  DistributionSpec distribution;
  std::uint64_t seed = 0;
  // Baseline every delta is measured against.
  MechanismSummary top_k;
  std::vector<MechanismSummary> mechanisms;
};

SimulationResult run_concurrent(const SimulationConfig& config,
                                const DistributionSpec& distribution,
                                std::uint64_t seed);

SimulationResult run_sequential(const SimulationConfig& config,
                                const DistributionSpec& distribution,
                                std::uint64_t seed);

// Dispatches on config.mode.
SimulationResult run_simulation(const SimulationConfig& config,
                                const DistributionSpec& distribution,
                                std::uint64_t seed);

struct SweepGrid {
  std::vector<double> kprime_rates;
  std::vector<double> nprime_rates;

  // 0.1, 0.2, ..., 1.0 on both axes.
  static SweepGrid tenths();
};

struct SkippedPoint {
  double kprime_rate = 0.0;
  double nprime_rate = 0.0;
  std::string reason;
};

struct SweepResult {
  SimulationResult simulation;
  std::vector<SkippedPoint> skipped;
  // [m - 2]: frontier over top-k plus every grid point for m decision-makers.
  std::vector<std::vector<metrics::FrontierPoint>> frontier_by_m;
};

// Runs every valid partial lottery of the grid (config.mechanisms is
// ignored). Grid points outside the partial lottery bounds are skipped and
// listed with the reason.
SweepResult sweep_partial_bf(const SimulationConfig& config,
                             const DistributionSpec& distribution,
                             const SweepGrid& grid, std::uint64_t seed);

}  // namespace randalloc::claimsim

#endif  // RANDALLOC_CLAIMSIM_SIMULATION_HPP_

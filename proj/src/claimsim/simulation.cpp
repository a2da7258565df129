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

#include "randalloc/claimsim/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "randalloc/core/compliance.hpp"
#include "randalloc/core/errors.hpp"
#include "randalloc/core/parallel.hpp"
#include "randalloc/lottery/lottery.hpp"

namespace randalloc::claimsim {
namespace {

constexpr std::uint64_t kClaimsStream = 0;
constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kLotteryStream = 2;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double parse_rate(std::string_view text, std::string_view context) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("bad rate '{}' in '{}'", text, context));
  }
  return value;
}

struct Runner {
  MechanismSpec spec;
  LotteryConfig config;
  std::uint64_t stream_key;
};

std::vector<Runner> make_runners(const SimulationConfig& config) {
  std::vector<Runner> runners;
  const MechanismSpec baseline{Mechanism::kTopK};
  runners.push_back({baseline, baseline.resolve(config.n, config.k()),
                     fnv1a(baseline.label())});
  for (const auto& spec : config.mechanisms) {
    runners.push_back(
        {spec, spec.resolve(config.n, config.k()), fnv1a(spec.label())});
  }
  return runners;
}

AllocationResult run_mechanism(const Runner& runner, const ClaimProfile& claims,
                               std::span<const std::size_t> order,
                               RandomSource& rng) {
  const std::size_t k = runner.config.k;
  switch (runner.config.mechanism) {
    case Mechanism::kTopK:
      return lottery::make_result(claims, order.first(k), 0, "topk");
    case Mechanism::kUnweighted:
      return lottery::unweighted_lottery(claims, k, rng);
    case Mechanism::kBF:
      return lottery::bf_lottery(claims, k, rng).result;
    case Mechanism::kPartialBF:
      return lottery::partial_bf_lottery(claims, runner.config, order, rng)
          .result;
    default:
      throw ConfigError("unsupported simulation mechanism");
  }
}

struct MechanismRecord {
  std::vector<double> exclusion;
  double expected_utility = 0.0;
  std::vector<double> mean_claim;
};

using IterationRecord = std::vector<MechanismRecord>;

RandomSource lottery_stream(const RandomSource& base, const Runner& runner,
                            std::size_t decision_maker) {
  return base.derive(
      hash_combine(kLotteryStream, hash_combine(runner.stream_key, decision_maker)));
}

RandomSource noise_stream(const RandomSource& base, std::size_t decision_maker) {
  return base.derive(hash_combine(kNoiseStream, decision_maker));
}

// Marks winners as included and returns the true claim mass they hold.
double score_allocation(const AllocationResult& result,
                        std::span<const double> true_claims,
                        std::vector<std::uint8_t>& excluded,
                        std::size_t& excluded_count) {
  double mass = 0.0;
  for (std::size_t i = 0; i < result.outcomes.size(); ++i) {
    if (result.outcomes[i] != 1) continue;
    mass += true_claims[i];
    if (excluded[i]) {
      excluded[i] = 0;
      --excluded_count;
    }
  }
  return mass;
}

IterationRecord concurrent_iteration(const SimulationConfig& config,
                                     const DistributionSpec& distribution,
                                     const std::vector<Runner>& runners,
                                     std::uint64_t seed, std::size_t iteration) {
  const RandomSource base(seed, iteration);
  RandomSource claims_rng = base.derive(kClaimsStream);
  const ClaimProfile truth = sample_claims(distribution, config.n, claims_rng);
  const double n = static_cast<double>(config.n);
  const double k = static_cast<double>(config.k());
  const double m = static_cast<double>(config.m);

  IterationRecord record(runners.size());
  std::vector<std::vector<std::uint8_t>> excluded(
      runners.size(), std::vector<std::uint8_t>(config.n, 1));
  std::vector<std::size_t> excluded_count(runners.size(), config.n);
  for (auto& r : record) r.exclusion.resize(config.m);

  for (std::size_t j = 0; j < config.m; ++j) {
    RandomSource noise_rng = noise_stream(base, j);
    const ClaimProfile perceived =
        add_decision_maker_noise(truth, config.noise_sigma, noise_rng);
    const auto order = canonical_order(perceived);
    for (std::size_t r = 0; r < runners.size(); ++r) {
      RandomSource rng = lottery_stream(base, runners[r], j);
      const auto result = run_mechanism(runners[r], perceived, order, rng);
      const double mass = score_allocation(result, truth.claims(), excluded[r],
                                           excluded_count[r]);
      record[r].expected_utility += mass / k / m;
      record[r].exclusion[j] = static_cast<double>(excluded_count[r]) / n;
    }
  }
  return record;
}

IterationRecord sequential_iteration(const SimulationConfig& config,
                                     const DistributionSpec& distribution,
                                     const std::vector<Runner>& runners,
                                     std::uint64_t seed, std::size_t iteration) {
  const RandomSource base(seed, iteration);
  RandomSource claims_rng = base.derive(kClaimsStream);
  const ClaimProfile initial = sample_claims(distribution, config.n, claims_rng);
  const double n = static_cast<double>(config.n);
  const double k = static_cast<double>(config.k());
  const double m = static_cast<double>(config.m);

  IterationRecord record(runners.size());
  for (std::size_t r = 0; r < runners.size(); ++r) {
    std::vector<double> state(initial.claims().begin(), initial.claims().end());
    std::vector<std::uint8_t> excluded(config.n, 1);
    std::size_t excluded_count = config.n;
    record[r].exclusion.resize(config.m);
    record[r].mean_claim.resize(config.m);
    for (std::size_t j = 0; j < config.m; ++j) {
      const ClaimProfile current = initial.with_claims(state);
      // Every mechanism sees the same noise draws at step j.
      RandomSource noise_rng = noise_stream(base, j);
      const ClaimProfile perceived =
          add_decision_maker_noise(current, config.noise_sigma, noise_rng);
      const auto order = canonical_order(perceived);
      RandomSource rng = lottery_stream(base, runners[r], j);
      const auto result = run_mechanism(runners[r], perceived, order, rng);
      const double mass =
          score_allocation(result, state, excluded, excluded_count);
      record[r].expected_utility += mass / k / m;
      record[r].exclusion[j] = static_cast<double>(excluded_count) / n;

      double total = 0.0;
      for (std::size_t i = 0; i < config.n; ++i) {
        if (result.outcomes[i] == 1) {
          state[i] = std::min(1.0, state[i] + config.benefit);
        }
        total += state[i];
      }
      record[r].mean_claim[j] = total / n;
    }
  }
  return record;
}

SimulationResult reduce(const SimulationConfig& config,
                        const DistributionSpec& distribution, std::uint64_t seed,
                        const std::vector<Runner>& runners,
                        const std::vector<IterationRecord>& records) {
  const std::size_t iterations = records.size();
  std::vector<double> values(iterations);
  auto collect = [&](auto&& getter) {
    for (std::size_t it = 0; it < iterations; ++it) values[it] = getter(records[it]);
    return summarize(values);
  };

  std::vector<MechanismSummary> summaries;
  for (std::size_t r = 0; r < runners.size(); ++r) {
    MechanismSummary s;
    s.spec = runners[r].spec;
    s.config = runners[r].config;
    for (std::size_t j = 0; j < config.m; ++j) {
      s.exclusion_by_m.push_back(
          collect([&](const IterationRecord& rec) { return rec[r].exclusion[j]; }));
      s.exclusion_reduction_by_m.push_back(collect([&](const IterationRecord& rec) {
        return rec[0].exclusion[j] - rec[r].exclusion[j];
      }));
    }
    s.expected_utility =
        collect([&](const IterationRecord& rec) { return rec[r].expected_utility; });
    s.utility_delta = collect([&](const IterationRecord& rec) {
      return rec[0].expected_utility - rec[r].expected_utility;
    });
    if (config.mode == SimulationMode::kSequential) {
      for (std::size_t j = 0; j < config.m; ++j) {
        s.mean_claim_by_step.push_back(collect(
            [&](const IterationRecord& rec) { return rec[r].mean_claim[j]; }));
      }
    }
    summaries.push_back(std::move(s));
  }

  SimulationResult result;
  result.config = config;
  result.distribution = distribution;
  result.seed = seed;
  result.top_k = std::move(summaries.front());
  result.mechanisms.assign(std::make_move_iterator(summaries.begin() + 1),
                           std::make_move_iterator(summaries.end()));
  return result;
}

template <typename IterationFn>
SimulationResult run(const SimulationConfig& config,
                     const DistributionSpec& distribution, std::uint64_t seed,
                     IterationFn&& iteration_fn) {
  config.validate();
  distribution.validate();
  const auto runners = make_runners(config);
  std::vector<IterationRecord> records(config.iterations);
  parallel_for(config.iterations, config.threads, [&](std::size_t it) {
    records[it] = iteration_fn(config, distribution, runners, seed, it);
  });
  return reduce(config, distribution, seed, runners, records);
}

}  // namespace

LotteryConfig MechanismSpec::resolve(std::size_t n, std::size_t k) const {
  LotteryConfig config{.k = k, .n = n, .mechanism = mechanism};
  switch (mechanism) {
    case Mechanism::kTopK:
    case Mechanism::kUnweighted:
    case Mechanism::kBF:
      break;
    case Mechanism::kPartialBF:
      config.k_prime = static_cast<std::size_t>(
          std::llround(kprime_rate * static_cast<double>(k)));
      config.n_prime = nprime_is_k ? k
                                   : static_cast<std::size_t>(std::llround(
                                         nprime_rate * static_cast<double>(n)));
      break;
    default:
      throw ConfigError(fmt::format(
          "mechanism '{}' is not available with known claims",
          randalloc::to_string(mechanism)));
  }
  config.validate();
  return config;
}

std::string MechanismSpec::label() const {
  if (mechanism == Mechanism::kPartialBF) {
    if (nprime_is_k) return fmt::format("partial_bf:{}:k", kprime_rate);
    return fmt::format("partial_bf:{}:{}", kprime_rate, nprime_rate);
  }
  return std::string(randalloc::to_string(mechanism));
}

MechanismSpec MechanismSpec::parse(std::string_view text) {
  const auto first = text.find(':');
  MechanismSpec spec{parse_mechanism(text.substr(0, first))};
  if (spec.mechanism == Mechanism::kPartialBF) {
    const auto second = text.find(':', first == std::string_view::npos ? first : first + 1);
    if (first == std::string_view::npos || second == std::string_view::npos) {
      throw ConfigError(fmt::format(
          "partial lottery needs 'partial_bf:<k'/k>:<n'/n>', got '{}'", text));
    }
    spec.kprime_rate = parse_rate(text.substr(first + 1, second - first - 1), text);
    if (text.substr(second + 1) == "k") {
      spec.nprime_is_k = true;
    } else {
      spec.nprime_rate = parse_rate(text.substr(second + 1), text);
    }
  } else if (first != std::string_view::npos) {
    throw ConfigError(fmt::format("unexpected parameters in '{}'", text));
  }
  return spec;
}

std::string_view to_string(SimulationMode mode) {
  return mode == SimulationMode::kConcurrent ? "concurrent" : "sequential";
}

SimulationMode parse_mode(std::string_view text) {
  if (text == "concurrent") return SimulationMode::kConcurrent;
  if (text == "sequential") return SimulationMode::kSequential;
  throw ConfigError(fmt::format("unknown simulation mode '{}'", text));
}

std::size_t SimulationConfig::k() const {
  const auto k = std::llround(selection_rate * static_cast<double>(n));
  return static_cast<std::size_t>(std::max<long long>(k, 1));
}

void SimulationConfig::validate() const {
  if (n == 0) throw ConfigError("n must be positive");
  if (!(selection_rate > 0.0 && selection_rate <= 1.0)) {
    throw ConfigError(
        fmt::format("selection rate {} outside (0, 1]", selection_rate));
  }
  if (iterations == 0) throw ConfigError("iterations must be >= 1");
  if (m == 0) throw ConfigError("m must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  if (!(benefit >= 0.0)) throw ConfigError("benefit must be >= 0");
  for (const auto& spec : mechanisms) spec.resolve(n, k());
}

Estimate summarize(std::span<const double> values) {
  Estimate e;
  if (values.empty()) return e;
  // Accumulate offsets from the first value: a constant series then has
  // its exact value as the mean instead of a rounded sum / count.
  const double shift = values.front();
  double sum = 0.0;
  for (double v : values) sum += v - shift;
  const double count = static_cast<double>(values.size());
  e.mean = shift + sum / count;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.std_error = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
  }
  return e;
}

const Estimate& MechanismSummary::ser(std::size_t m) const {
  if (m < 2 || m > exclusion_by_m.size()) {
    throw PreconditionError(fmt::format(
        "SER needs 2 <= m <= {}, got {}", exclusion_by_m.size(), m));
  }
  return exclusion_by_m[m - 1];
}

SimulationResult run_concurrent(const SimulationConfig& config,
                                const DistributionSpec& distribution,
                                std::uint64_t seed) {
  if (config.mode != SimulationMode::kConcurrent) {
    throw ConfigError("run_concurrent needs mode = concurrent");
  }
  return run(config, distribution, seed, concurrent_iteration);
}

SimulationResult run_sequential(const SimulationConfig& config,
                                const DistributionSpec& distribution,
                                std::uint64_t seed) {
  if (config.mode != SimulationMode::kSequential) {
    throw ConfigError("run_sequential needs mode = sequential");
  }
  return run(config, distribution, seed, sequential_iteration);
}

SimulationResult run_simulation(const SimulationConfig& config,
                                const DistributionSpec& distribution,
                                std::uint64_t seed) {
  return config.mode == SimulationMode::kConcurrent
             ? run_concurrent(config, distribution, seed)
             : run_sequential(config, distribution, seed);
}

SweepGrid SweepGrid::tenths() {
  SweepGrid grid;
  for (int i = 1; i <= 10; ++i) {
    grid.kprime_rates.push_back(i / 10.0);
    grid.nprime_rates.push_back(i / 10.0);
  }
  return grid;
}

SweepResult sweep_partial_bf(const SimulationConfig& config,
                             const DistributionSpec& distribution,
                             const SweepGrid& grid, std::uint64_t seed) {
  SweepResult sweep;
  SimulationConfig sweep_config = config;
  sweep_config.mechanisms.clear();
  for (double kr : grid.kprime_rates) {
    for (double nr : grid.nprime_rates) {
      const MechanismSpec spec{Mechanism::kPartialBF, kr, nr};
      try {
        const auto resolved = spec.resolve(config.n, config.k());
        if (resolved.k_prime == 0) {
          sweep.skipped.push_back({kr, nr, "k' rounds to 0 (no randomization)"});
          continue;
        }
      } catch (const ConfigError& e) {
        sweep.skipped.push_back({kr, nr, e.what()});
        continue;
      }
      sweep_config.mechanisms.push_back(spec);
    }
  }

  sweep.simulation = run_simulation(sweep_config, distribution, seed);
  const auto& sim = sweep.simulation;
  for (std::size_t m = 2; m <= config.m; ++m) {
    std::vector<metrics::FrontierPoint> points;
    points.push_back({0.0, sim.top_k.ser(m).mean, sim.top_k.config,
                      sim.top_k.spec.label()});
    for (const auto& s : sim.mechanisms) {
      points.push_back(
          {s.utility_delta.mean, s.ser(m).mean, s.config, s.spec.label()});
    }
    sweep.frontier_by_m.push_back(metrics::frontier(std::move(points)));
  }
  return sweep;
}

}  // namespace randalloc::claimsim

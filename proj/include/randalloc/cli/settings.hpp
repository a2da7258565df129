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

// Typed settings for the `simulate` and `allocate` commands, read from a
// KeyValueConfig and written back as a complete config file. Writing then
// reading gives back the same settings, which is what makes the config
// snapshot in a manifest enough to rerun a command.

#ifndef RANDALLOC_CLI_SETTINGS_HPP_
#define RANDALLOC_CLI_SETTINGS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "randalloc/claimsim/distributions.hpp"
#include "randalloc/claimsim/simulation.hpp"
#include "randalloc/io/config.hpp"
#include "randalloc/predict/dataset.hpp"
#include "randalloc/uncertain_alloc/protocol.hpp"

namespace randalloc::cli {

// [run] seed, threads
// [simulate] distributions, selection_rates, n, iterations, m, noise_sigma,
//            mode, benefit, mechanisms
// [sweep] enabled, kprime_rates, nprime_rates
struct SimulateSettings {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::vector<claimsim::DistributionSpec> distributions;
  std::vector<double> selection_rates{0.25};
  // selection_rate and mechanisms of `base` are replaced per run.
  claimsim::SimulationConfig base;
  bool sweep = false;
  claimsim::SweepGrid grid = claimsim::SweepGrid::tenths();

  static SimulateSettings defaults();
  static SimulateSettings from_config(const io::KeyValueConfig& config);
  std::string to_ini() const;
  void validate() const;
};

// [run] seed, threads
// [dataset] path, label, id, numeric, categorical, probability
// [allocate] model, selection_rate, train_ratio, repetitions, iterations,
//            methods, kprime_rate, nprime_rate
// [model] lr_*, tree_*, forest_*
// [ensemble] members, fraction, sampling, max_retries, vote_rule, retrain
// [conformal] alpha, reference_cap, calibration_fraction, mode
// [study] enabled, m, selection_rates, boundary_kprime_rates, alphas
struct AllocateSettings {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::optional<std::filesystem::path> dataset;
  predict::DatasetSchema schema;
  uncertain::ProtocolConfig protocol;
  bool study = false;
  // protocol and seed are taken from the fields above.
  uncertain::StudyConfig study_config;

  static AllocateSettings defaults();
  static AllocateSettings from_config(const io::KeyValueConfig& config);
  std::string to_ini() const;
  // Copies seed and threads into the nested configurations.
  uncertain::ProtocolConfig resolved_protocol() const;
  uncertain::StudyConfig resolved_study() const;
  void validate() const;
};

}  // namespace randalloc::cli

#endif  // RANDALLOC_CLI_SETTINGS_HPP_

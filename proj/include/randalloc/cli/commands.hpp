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

// The randalloc commands. Each cmd_* writes its CSV outputs and a
// manifest.json into the output directory and returns the manifest; errors
// are thrown. run_cli wraps them with argument parsing and the exit-code
// contract: 0 success, 1 runtime failure, 2 usage, configuration or input
// error.

#ifndef RANDALLOC_CLI_COMMANDS_HPP_
#define RANDALLOC_CLI_COMMANDS_HPP_

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "randalloc/cli/settings.hpp"
#include "randalloc/io/csv.hpp"
#include "randalloc/io/manifest.hpp"

namespace randalloc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// results.csv, frontier.csv and, for sweeps, sweep_skipped.csv.
io::RunManifest cmd_simulate(const SimulateSettings& settings,
                             const std::filesystem::path& out_dir, std::ostream& out);

// methods.csv, repetitions.csv, selection_frequencies.csv, predictions.csv,
// table_variance.csv / table_outliers.csv for the methods that ran, and
// study_points.csv / study_frontier.csv when the study is enabled.
io::RunManifest cmd_allocate(const AllocateSettings& settings,
                             const std::filesystem::path& out_dir, std::ostream& out);

struct AuditOptions {
  std::filesystem::path input;
  std::string id_column;
  std::string group_by;
  // Outcome columns; empty means every column except id and group.
  std::vector<std::string> columns;
};

struct GroupExclusion {
  std::string group;
  std::size_t individuals = 0;
  std::size_t excluded = 0;
  double ser = 0.0;
};

struct AuditReport {
  std::vector<std::string> columns;
  std::vector<std::string> ids;
  std::vector<std::string> groups;
  std::vector<std::size_t> selected_count;
  std::vector<std::uint8_t> excluded;
  // Fraction of zeros per outcome column.
  std::vector<double> column_exclusion;
  double ser = 0.0;
  // "all" first, then groups in lexicographic order when grouping.
  std::vector<GroupExclusion> by_group;
};

// Entries must be 0 or 1 (IngestionError with the row otherwise); at least
// two outcome columns are needed.
AuditReport audit_outcomes(const io::CsvTable& table, const AuditOptions& options);

// audit_summary.csv, audit_columns.csv, audit_individuals.csv.
io::RunManifest cmd_audit(const AuditOptions& options,
                          const std::filesystem::path& out_dir, std::ostream& out);

// Reads a config file, or the config snapshot of a manifest.json.
io::KeyValueConfig load_config(const std::filesystem::path& path);

int exit_code_for(const std::exception& error);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace randalloc::cli

#endif  // RANDALLOC_CLI_COMMANDS_HPP_

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

#include "randalloc/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>

#include <CLI11.hpp>
#include <boost/algorithm/string/trim.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "randalloc/core/errors.hpp"
#include "randalloc/core/log.hpp"
#include "randalloc/core/random.hpp"
#include "randalloc/metrics/metrics.hpp"
#include "randalloc/predict/synthetic.hpp"
#include "randalloc/version.hpp"

namespace randalloc::cli {
namespace {

namespace fs = std::filesystem;
using io::CsvWriter;
using io::format_double;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Collects the files of one run and seals them into the manifest.
class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) {
      throw Error(fmt::format("cannot create output directory '{}': {}", dir_.string(),
                              ec.message()));
    }
  }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write '{}'", (dir_ / name).string()));
    files_.push_back(name);
    return out;
  }

  void seal(io::RunManifest& manifest) const {
    manifest.outputs.clear();
    for (const auto& name : files_) {
      manifest.outputs.push_back(io::digest_file(dir_ / name, name));
    }
    manifest.write(dir_ / io::kManifestFile);
  }

  const fs::path& path() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

io::RunManifest new_manifest(std::string command, std::uint64_t seed, std::string config) {
  io::RunManifest m;
  m.command = std::move(command);
  m.seed = seed;
  m.config = std::move(config);
  m.generator_version = std::string(kGeneratorVersion);
  m.code_version = std::string(kVersion);
  m.started_at = io::utc_timestamp();
  return m;
}

std::string optional_field(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string();
}

// ---------------------------------------------------------------------------
// simulate

struct SimulationRun {
  const claimsim::DistributionSpec& distribution;
  const claimsim::SimulationConfig& config;
};

void write_metric(CsvWriter& w, const SimulationRun& run,
                  const claimsim::MechanismSummary& s, std::size_t m,
                  std::string_view metric, const claimsim::Estimate& e) {
  w.field(claimsim::to_string(run.distribution.family))
      .field(run.distribution.param)
      .field(run.config.n)
      .field(run.config.k())
      .field(s.spec.label())
      .field(s.config.k_prime)
      .field(s.config.n_prime)
      .field(m)
      .field(run.config.noise_sigma)
      .field(claimsim::to_string(run.config.mode))
      .field(metric)
      .field(e.mean)
      .field(e.std_error);
  w.end_row();
}

void write_summary(CsvWriter& w, const SimulationRun& run,
                   const claimsim::MechanismSummary& s, bool baseline) {
  for (std::size_t j = 1; j < s.exclusion_by_m.size(); ++j) {
    write_metric(w, run, s, j + 1, "ser", s.exclusion_by_m[j]);
  }
  if (!baseline) {
    for (std::size_t j = 1; j < s.exclusion_reduction_by_m.size(); ++j) {
      write_metric(w, run, s, j + 1, "ser_reduction", s.exclusion_reduction_by_m[j]);
    }
  }
  write_metric(w, run, s, run.config.m, "expected_utility", s.expected_utility);
  if (!baseline) write_metric(w, run, s, run.config.m, "utility_delta", s.utility_delta);
  for (std::size_t step = 0; step < s.mean_claim_by_step.size(); ++step) {
    write_metric(w, run, s, step + 1, "mean_claim", s.mean_claim_by_step[step]);
  }
}

std::vector<std::vector<metrics::FrontierPoint>> frontiers_of(
    const claimsim::SimulationResult& result) {
  std::vector<std::vector<metrics::FrontierPoint>> out;
  for (std::size_t m = 2; m <= result.config.m; ++m) {
    std::vector<metrics::FrontierPoint> points{
        {0.0, result.top_k.ser(m).mean, result.top_k.config, result.top_k.spec.label()}};
    for (const auto& s : result.mechanisms) {
      points.push_back({s.utility_delta.mean, s.ser(m).mean, s.config, s.spec.label()});
    }
    out.push_back(metrics::frontier(std::move(points)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// allocate

void write_mean(CsvWriter& w, const uncertain::Mean& m) {
  w.field(m.mean).field(m.std_error);
}

void write_table(OutputDir& dir, const std::string& name,
                 const uncertain::ProtocolResult& result, uncertain::Method method) {
  auto file = dir.open(name);
  CsvWriter w(file);
  w.row({"model", "alpha", "k_over_n", "kprime_rate", "nprime_rate", "utility_method",
         "utility_boundary_matched", "utility_topk"});
  const auto& s = result.summary(method);
  w.field(predict::to_string(result.config.model.kind));
  if (method == uncertain::Method::kOutlier) {
    w.field(result.config.conformal.alpha);
  } else {
    w.field(std::string_view());
  }
  w.field(result.config.selection_rate)
      .field(s.kprime_rate.mean)
      .field(s.nprime_rate.mean)
      .field(s.utility.mean)
      .field(s.utility_boundary_matched.mean)
      .field(s.utility_topk.mean);
  w.end_row();
}

void print_methods(std::ostream& out, const uncertain::ProtocolResult& result) {
  fmt::print(out, "{:<10} {:>8} {:>8} {:>9} {:>9} {:>9}\n", "method", "k'/k", "n'/n",
             "utility", "matched", "top-k");
  for (const auto& s : result.methods) {
    fmt::print(out, "{:<10} {:>8.4f} {:>8.4f} {:>9.4f} {:>9.4f} {:>9.4f}\n",
               uncertain::to_string(s.method), s.kprime_rate.mean, s.nprime_rate.mean,
               s.utility.mean, s.utility_boundary_matched.mean, s.utility_topk.mean);
  }
}

// ---------------------------------------------------------------------------
// audit

std::uint8_t parse_binary(const std::string& text, std::size_t row,
                          const std::string& column) {
  const auto v = boost::algorithm::trim_copy(text);
  if (v == "0") return 0;
  if (v == "1") return 1;
  throw IngestionError(
      fmt::format("non-binary outcome '{}' in column '{}'", text, column), row);
}

std::size_t require_column(const io::CsvTable& table, const std::string& name) {
  const auto c = table.column(name);
  if (!c) throw ConfigError(fmt::format("no column named '{}'", name));
  return *c;
}

// ---------------------------------------------------------------------------
// argument parsing

using Overrides = std::map<std::string, std::string>;

void add_override(CLI::App* app, Overrides& overrides, const std::string& flag,
                  const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&overrides, key](const std::string& value) { overrides[key] = value; }, help);
}

io::KeyValueConfig config_with(const std::string& path, const Overrides& overrides) {
  auto config = path.empty() ? io::KeyValueConfig{} : load_config(path);
  for (const auto& [key, value] : overrides) config.set(key, value);
  return config;
}

}  // namespace

io::RunManifest cmd_simulate(const SimulateSettings& settings, const fs::path& out_dir,
                             std::ostream& out) {
  settings.validate();
  Stopwatch total;
  OutputDir dir(out_dir);
  auto manifest = new_manifest("simulate", settings.seed, settings.to_ini());
  manifest.notes["noise"] = "redrawn per decision-maker, shared across mechanisms";
  manifest.notes["ser"] = "unweighted mean over individuals";

  auto results_file = dir.open("results.csv");
  auto frontier_file = dir.open("frontier.csv");
  CsvWriter results(results_file);
  CsvWriter frontier(frontier_file);
  results.row({"distribution", "param", "n", "k", "mechanism", "k_prime", "n_prime", "m",
               "noise_sigma", "mode", "metric", "value", "stderr"});
  frontier.row({"distribution", "param", "n", "k", "m", "noise_sigma", "mode", "label",
                "k_prime", "n_prime", "utility_delta", "ser"});

  std::optional<std::ofstream> skipped_file;
  std::optional<CsvWriter> skipped;
  if (settings.sweep) {
    skipped_file.emplace(dir.open("sweep_skipped.csv"));
    skipped.emplace(*skipped_file);
    skipped->row({"distribution", "param", "n", "k", "kprime_rate", "nprime_rate", "reason"});
  }

  for (const auto& distribution : settings.distributions) {
    for (double rate : settings.selection_rates) {
      Stopwatch clock;
      auto config = settings.base;
      config.selection_rate = rate;
      config.threads = settings.threads;

      claimsim::SimulationResult result;
      std::vector<std::vector<metrics::FrontierPoint>> fronts;
      if (settings.sweep) {
        auto sweep = claimsim::sweep_partial_bf(config, distribution, settings.grid,
                                                settings.seed);
        for (const auto& p : sweep.skipped) {
          skipped->field(claimsim::to_string(distribution.family))
              .field(distribution.param)
              .field(config.n)
              .field(config.k())
              .field(p.kprime_rate)
              .field(p.nprime_rate)
              .field(p.reason);
          skipped->end_row();
        }
        result = std::move(sweep.simulation);
        fronts = std::move(sweep.frontier_by_m);
      } else {
        result = claimsim::run_simulation(config, distribution, settings.seed);
        fronts = frontiers_of(result);
      }

      const SimulationRun run{distribution, result.config};
      write_summary(results, run, result.top_k, true);
      for (const auto& s : result.mechanisms) write_summary(results, run, s, false);
      for (std::size_t j = 0; j < fronts.size(); ++j) {
        for (const auto& p : fronts[j]) {
          frontier.field(claimsim::to_string(distribution.family))
              .field(distribution.param)
              .field(config.n)
              .field(config.k())
              .field(j + 2)
              .field(config.noise_sigma)
              .field(claimsim::to_string(config.mode))
              .field(p.label)
              .field(p.config.k_prime)
              .field(p.config.n_prime)
              .field(p.utility_delta)
              .field(p.ser);
          frontier.end_row();
        }
      }
      const auto label = fmt::format("{} k/n={}", distribution.label(), rate);
      manifest.timings_seconds.emplace_back(label, clock.seconds());
      fmt::print(out, "{}: {} mechanism(s) + top-k, {} iterations\n", label,
                 result.mechanisms.size(), config.iterations);
    }
  }
  results_file.close();
  frontier_file.close();
  if (skipped_file) skipped_file->close();
  manifest.timings_seconds.emplace_back("total", total.seconds());
  dir.seal(manifest);
  fmt::print(out, "wrote {} file(s) and {} to {}\n", manifest.outputs.size(),
             io::kManifestFile, dir.path().string());
  return manifest;
}

io::RunManifest cmd_allocate(const AllocateSettings& settings, const fs::path& out_dir,
                             std::ostream& out) {
  settings.validate();
  if (!settings.dataset) {
    throw ConfigError("no dataset: pass a CSV path or set dataset.path");
  }
  Stopwatch total;
  const auto protocol = settings.resolved_protocol();
  const auto data = predict::ingest_csv(*settings.dataset, settings.schema);

  OutputDir dir(out_dir);
  auto manifest = new_manifest("allocate", settings.seed, settings.to_ini());
  manifest.inputs.push_back(io::digest_file(*settings.dataset, settings.dataset->string()));
  manifest.notes["boundary_band"] =
      "lower-anchored: top k-k' fixed, k' slots drawn from the next n'";
  manifest.notes["conformal_p_value"] = "(1 + #{calibration >= score}) / (n_cal + 1)";
  manifest.notes["reference_cap"] = fmt::format("{}", protocol.conformal.reference_cap);
  manifest.notes["model"] = protocol.model.describe();

  Stopwatch clock;
  const auto result = uncertain::run_protocol(data, protocol);
  manifest.timings_seconds.emplace_back("protocol", clock.seconds());

  {
    auto file = dir.open("methods.csv");
    CsvWriter w(file);
    w.row({"model", "method", "k_over_n", "kprime_rate", "kprime_rate_se", "nprime_rate",
           "nprime_rate_se", "utility", "utility_se", "utility_boundary_matched",
           "utility_boundary_matched_se", "utility_topk", "utility_topk_se",
           "expected_utility", "expected_utility_se", "demoted", "score_filled"});
    for (const auto& s : result.methods) {
      w.field(predict::to_string(protocol.model.kind))
          .field(uncertain::to_string(s.method))
          .field(protocol.selection_rate);
      write_mean(w, s.kprime_rate);
      write_mean(w, s.nprime_rate);
      write_mean(w, s.utility);
      write_mean(w, s.utility_boundary_matched);
      write_mean(w, s.utility_topk);
      if (s.expected_utility) {
        write_mean(w, *s.expected_utility);
      } else {
        w.field(std::string_view()).field(std::string_view());
      }
      w.field(s.demoted).field(s.score_filled);
      w.end_row();
    }
  }
  {
    auto file = dir.open("repetitions.csv");
    CsvWriter w(file);
    w.row({"repetition", "pool", "k", "positive_rate", "topk_utility", "flagged", "q_hat",
           "reference_size", "calibration_size"});
    for (const auto& r : result.repetitions) {
      w.field(r.repetition)
          .field(r.pool)
          .field(r.k)
          .field(r.positive_rate)
          .field(r.topk_utility)
          .field(r.flagged)
          .field(r.q_hat)
          .field(r.reference_size)
          .field(r.calibration_size);
      w.end_row();
    }
  }
  {
    auto file = dir.open("selection_frequencies.csv");
    CsvWriter w(file);
    w.row({"method", "id", "draws", "selected", "frequency"});
    for (std::size_t i = 0; i < result.methods.size(); ++i) {
      for (const auto& f : result.frequencies[i]) {
        w.field(uncertain::to_string(result.methods[i].method))
            .field(std::to_string(f.id))
            .field(f.draws)
            .field(f.selected)
            .field(f.draws == 0 ? 0.0
                                : static_cast<double>(f.selected) /
                                      static_cast<double>(f.draws));
        w.end_row();
      }
    }
  }
  {
    auto file = dir.open("predictions.csv");
    CsvWriter w(file);
    w.row({"repetition", "id", "score", "vote_fraction", "p_value"});
    for (const auto& p : result.predictions) {
      w.field(p.repetition)
          .field(std::to_string(p.id))
          .field(p.score)
          .field(optional_field(p.vote_fraction))
          .field(optional_field(p.p_value));
      w.end_row();
    }
  }
  const auto ran = [&](uncertain::Method m) {
    return std::find(protocol.methods.begin(), protocol.methods.end(), m) !=
           protocol.methods.end();
  };
  if (ran(uncertain::Method::kVariance)) {
    write_table(dir, "table_variance.csv", result, uncertain::Method::kVariance);
  }
  if (ran(uncertain::Method::kOutlier)) {
    write_table(dir, "table_outliers.csv", result, uncertain::Method::kOutlier);
  }

  if (settings.study) {
    Stopwatch study_clock;
    const auto study = uncertain::ser_tradeoff_study(data, settings.resolved_study());
    manifest.timings_seconds.emplace_back("study", study_clock.seconds());
    {
      auto file = dir.open("study_points.csv");
      CsvWriter w(file);
      w.row({"method", "label", "m", "selection_rate", "kprime_rate", "nprime_rate",
             "utility", "utility_delta", "ser"});
      for (const auto& p : study.points) {
        w.field(uncertain::to_string(p.method))
            .field(p.label)
            .field(settings.study_config.m)
            .field(p.selection_rate)
            .field(p.kprime_rate)
            .field(p.nprime_rate)
            .field(p.utility)
            .field(p.utility_delta)
            .field(p.ser);
        w.end_row();
      }
    }
    {
      auto file = dir.open("study_frontier.csv");
      CsvWriter w(file);
      w.row({"frontier", "label", "utility_delta", "ser"});
      for (const auto& [key, points] : study.frontiers) {
        for (const auto& p : points) {
          w.field(key).field(p.label).field(p.utility_delta).field(p.ser);
          w.end_row();
        }
      }
    }
  }

  fmt::print(out, "{} rows, positive rate {:.4f}, {} x {} ({}), k/n = {}\n", result.rows,
             result.positive_rate, protocol.repetitions, protocol.iterations,
             predict::to_string(protocol.model.kind), protocol.selection_rate);
  print_methods(out, result);
  manifest.timings_seconds.emplace_back("total", total.seconds());
  dir.seal(manifest);
  fmt::print(out, "wrote {} file(s) and {} to {}\n", manifest.outputs.size(),
             io::kManifestFile, dir.path().string());
  return manifest;
}

AuditReport audit_outcomes(const io::CsvTable& table, const AuditOptions& options) {
  std::optional<std::size_t> id_col;
  std::optional<std::size_t> group_col;
  if (!options.id_column.empty()) id_col = require_column(table, options.id_column);
  if (!options.group_by.empty()) group_col = require_column(table, options.group_by);

  std::vector<std::size_t> outcome_cols;
  if (options.columns.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c != id_col && c != group_col) outcome_cols.push_back(c);
    }
  } else {
    for (const auto& name : options.columns) {
      outcome_cols.push_back(require_column(table, name));
    }
  }
  if (outcome_cols.size() < 2) {
    throw ConfigError(fmt::format(
        "systemic exclusion needs at least two outcome columns, got {}", outcome_cols.size()));
  }
  const std::size_t n = table.rows.size();
  if (n == 0) throw IngestionError("outcome table has no rows", 0);

  AuditReport report;
  metrics::EnsembleOutcomes outcomes(n);
  std::vector<std::uint8_t> row(n);
  for (std::size_t c : outcome_cols) {
    report.columns.push_back(table.header[c]);
    std::size_t zeros = 0;
    for (std::size_t r = 0; r < n; ++r) {
      row[r] = parse_binary(table.rows[r][c], r + 1, table.header[c]);
      zeros += row[r] == 0;
    }
    report.column_exclusion.push_back(static_cast<double>(zeros) / static_cast<double>(n));
    outcomes.add_row(row);
  }
  report.ser = metrics::ser(outcomes);
  report.excluded = outcomes.excluded_everywhere();
  report.selected_count.assign(n, 0);
  for (std::size_t j = 0; j < outcomes.m(); ++j) {
    for (std::size_t r = 0; r < n; ++r) report.selected_count[r] += outcomes.at(j, r);
  }
  for (std::size_t r = 0; r < n; ++r) {
    report.ids.push_back(id_col ? table.rows[r][*id_col] : std::to_string(r + 1));
    report.groups.push_back(group_col ? table.rows[r][*group_col] : std::string());
  }

  std::map<std::string, GroupExclusion> groups;
  GroupExclusion all{"all", n, 0, 0.0};
  for (std::size_t r = 0; r < n; ++r) {
    all.excluded += report.excluded[r];
    if (group_col) {
      auto& g = groups[report.groups[r]];
      g.group = report.groups[r];
      ++g.individuals;
      g.excluded += report.excluded[r];
    }
  }
  all.ser = report.ser;
  report.by_group.push_back(all);
  for (auto& [name, g] : groups) {
    g.ser = static_cast<double>(g.excluded) / static_cast<double>(g.individuals);
    report.by_group.push_back(g);
  }
  return report;
}

io::RunManifest cmd_audit(const AuditOptions& options, const fs::path& out_dir,
                          std::ostream& out) {
  Stopwatch total;
  const auto table = io::read_csv_file(options.input);
  const auto report = audit_outcomes(table, options);

  OutputDir dir(out_dir);
  io::IniWriter ini;
  ini.section("audit");
  ini.value("input", options.input.string());
  ini.value("id_column", options.id_column);
  ini.value("group_by", options.group_by);
  ini.value("columns", report.columns);
  auto manifest = new_manifest("audit", 0, ini.str());
  manifest.inputs.push_back(io::digest_file(options.input, options.input.string()));

  {
    auto file = dir.open("audit_summary.csv");
    CsvWriter w(file);
    w.row({"group", "individuals", "m", "excluded", "ser"});
    for (const auto& g : report.by_group) {
      w.field(g.group).field(g.individuals).field(report.columns.size()).field(g.excluded)
          .field(g.ser);
      w.end_row();
    }
  }
  {
    auto file = dir.open("audit_columns.csv");
    CsvWriter w(file);
    w.row({"column", "exclusion_rate"});
    for (std::size_t j = 0; j < report.columns.size(); ++j) {
      w.field(report.columns[j]).field(report.column_exclusion[j]);
      w.end_row();
    }
  }
  {
    auto file = dir.open("audit_individuals.csv");
    CsvWriter w(file);
    w.row({"id", "group", "selected_count", "excluded_everywhere"});
    for (std::size_t r = 0; r < report.ids.size(); ++r) {
      w.field(report.ids[r])
          .field(report.groups[r])
          .field(report.selected_count[r])
          .field(static_cast<int>(report.excluded[r]));
      w.end_row();
    }
  }
  fmt::print(out, "SER {} ({} of {} individuals excluded by all {} decision-makers)\n",
             format_double(report.ser), report.by_group.front().excluded, report.ids.size(),
             report.columns.size());
  for (std::size_t g = 1; g < report.by_group.size(); ++g) {
    const auto& group = report.by_group[g];
    fmt::print(out, "  {}: SER {} ({} of {})\n", group.group, format_double(group.ser),
               group.excluded, group.individuals);
  }
  manifest.timings_seconds.emplace_back("total", total.seconds());
  dir.seal(manifest);
  return manifest;
}

io::KeyValueConfig load_config(const fs::path& path) {
  if (path.extension() == ".json") {
    const auto manifest = io::RunManifest::read(path);
    return io::KeyValueConfig::parse(manifest.config, path.string());
  }
  return io::KeyValueConfig::load(path);
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error) != nullptr ||
      dynamic_cast<const IngestionError*>(&error) != nullptr ||
      dynamic_cast<const StructuralError*>(&error) != nullptr ||
      dynamic_cast<const UnsupportedMetricError*>(&error) != nullptr) {
    return kExitUsage;
  }
  return kExitFailure;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Claims-based randomized allocation: simulations, allocation on "
               "predictions, and exclusion audits."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kVersion));
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "debug, info, warn or error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

  Overrides overrides;
  std::string config_path;
  std::string out_dir = "out";

  auto* simulate = app.add_subcommand("simulate", "Known-claims experiments");
  simulate->add_option("--config", config_path, "Config file or manifest.json")
      ->check(CLI::ExistingFile);
  simulate->add_option("--out-dir", out_dir, "Output directory");
  add_override(simulate, overrides, "--seed", "run.seed", "Random seed");
  add_override(simulate, overrides, "--threads", "run.threads", "Worker threads (0 = all)");
  add_override(simulate, overrides, "--mechanism", "simulate.mechanisms",
               "Comma-separated mechanisms, e.g. bf,partial_bf:0.5:k");
  add_override(simulate, overrides, "--selection-rate", "simulate.selection_rates",
               "Comma-separated selection rates k/n");

  std::string dataset;
  auto* allocate = app.add_subcommand("allocate", "Allocation on predicted claims");
  allocate->add_option("dataset", dataset, "Dataset CSV (overrides dataset.path)")
      ->check(CLI::ExistingFile);
  allocate->add_option("--config", config_path, "Schema/config file or manifest.json")
      ->check(CLI::ExistingFile);
  allocate->add_option("--out-dir", out_dir, "Output directory");
  add_override(allocate, overrides, "--seed", "run.seed", "Random seed");
  add_override(allocate, overrides, "--threads", "run.threads", "Worker threads (0 = all)");
  add_override(allocate, overrides, "--mechanism", "allocate.methods",
               "Comma-separated methods: topk, boundary, variance, outlier");
  add_override(allocate, overrides, "--alpha", "conformal.alpha", "Outlier level");
  add_override(allocate, overrides, "--bootstrap-b", "ensemble.members", "Ensemble size");
  add_override(allocate, overrides, "--bootstrap-fraction", "ensemble.fraction",
               "Training share per ensemble member");
  add_override(allocate, overrides, "--kprime-rate", "allocate.kprime_rate",
               "Boundary randomization k'/k");
  add_override(allocate, overrides, "--nprime-rate", "allocate.nprime_rate",
               "Boundary randomization n'/n (0 = n' = k)");
  add_override(allocate, overrides, "--selection-rate", "allocate.selection_rate",
               "Selection rate k/n");
  allocate
      ->add_option_function<std::string>(
          "--mode", [&overrides](const std::string& v) { overrides["conformal.mode"] = v; },
          "Outlier lottery: unweighted or weighted")
      ->check(CLI::IsMember({"unweighted", "weighted"}));

  AuditOptions audit_options;
  std::string audit_input;
  auto* audit = app.add_subcommand("audit", "Systemic exclusion audit of outcome columns");
  audit->add_option("outcomes", audit_input, "CSV with one 0/1 column per decision-maker")
      ->required()
      ->check(CLI::ExistingFile);
  audit->add_option("--id-column", audit_options.id_column, "Identifier column");
  audit->add_option("--group-by", audit_options.group_by, "Column to break SER down by");
  audit->add_option("--columns", audit_options.columns, "Outcome columns (default: all)")
      ->delimiter(',');
  audit->add_option("--out-dir", out_dir, "Output directory");

  std::string print_target = "simulate";
  auto* print_config =
      app.add_subcommand("print-config", "Print a complete config with every default");
  print_config->add_option("command", print_target, "simulate or allocate")
      ->check(CLI::IsMember({"simulate", "allocate"}));
  print_config->add_option("--config", config_path, "Resolve this file instead of defaults")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  logger().set_level(spdlog::level::from_str(log_level));
  try {
    if (*simulate) {
      const auto settings = SimulateSettings::from_config(config_with(config_path, overrides));
      cmd_simulate(settings, out_dir, out);
    } else if (*allocate) {
      auto settings = AllocateSettings::from_config(config_with(config_path, overrides));
      if (!dataset.empty()) settings.dataset = fs::absolute(dataset).lexically_normal();
      cmd_allocate(settings, out_dir, out);
    } else if (*audit) {
      audit_options.input = audit_input;
      cmd_audit(audit_options, out_dir, out);
    } else if (*print_config) {
      const auto config = config_with(config_path, overrides);
      if (print_target == "simulate") {
        out << SimulateSettings::from_config(config).to_ini();
      } else {
        out << AllocateSettings::from_config(config).to_ini();
      }
    }
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return exit_code_for(e);
  }
  return kExitOk;
}

}  // namespace randalloc::cli

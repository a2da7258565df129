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

#include "randalloc/cli/settings.hpp"

#include <fmt/format.h>

#include "randalloc/core/errors.hpp"
#include "randalloc/predict/synthetic.hpp"

namespace randalloc::cli {
namespace {

using io::IniWriter;
using io::KeyValueConfig;

std::vector<std::string> labels_of(const std::vector<claimsim::DistributionSpec>& specs) {
  std::vector<std::string> out;
  for (const auto& s : specs) out.push_back(s.label());
  return out;
}

std::vector<std::string> labels_of(const std::vector<claimsim::MechanismSpec>& specs) {
  std::vector<std::string> out;
  for (const auto& s : specs) out.push_back(s.label());
  return out;
}

std::vector<std::string> labels_of(const std::vector<uncertain::Method>& methods) {
  std::vector<std::string> out;
  for (auto m : methods) out.emplace_back(uncertain::to_string(m));
  return out;
}

unsigned read_threads(const KeyValueConfig& config, unsigned fallback) {
  const auto threads = config.get_uint("run.threads", fallback);
  if (threads > 4096) throw ConfigError(fmt::format("run.threads {} is too large", threads));
  return static_cast<unsigned>(threads);
}

std::size_t read_size(const KeyValueConfig& config, std::string_view key,
                      std::size_t fallback) {
  return static_cast<std::size_t>(config.get_uint(key, fallback));
}

void write_run(IniWriter& ini, std::uint64_t seed, unsigned threads) {
  ini.section("run");
  ini.value("seed", seed);
  ini.comment("0 = machine parallelism; results do not depend on it");
  ini.value("threads", std::uint64_t{threads});
}

}  // namespace

SimulateSettings SimulateSettings::defaults() {
  SimulateSettings s;
  for (auto family : claimsim::kAllFamilies) {
    s.distributions.push_back(claimsim::DistributionSpec::standard(family));
  }
  s.selection_rates = {0.1, 0.25, 0.5};
  s.base.n = 1000;
  s.base.iterations = 1000;
  s.base.m = 3;
  s.base.noise_sigma = 0.025;
  s.base.mechanisms = {claimsim::MechanismSpec::parse("bf"),
                       claimsim::MechanismSpec::parse("partial_bf:0.5:k")};
  return s;
}

SimulateSettings SimulateSettings::from_config(const KeyValueConfig& config) {
  auto s = defaults();
  s.seed = config.get_uint("run.seed", s.seed);
  s.threads = read_threads(config, s.threads);

  if (const auto names = config.find("simulate.distributions")) {
    s.distributions.clear();
    for (const auto& name : io::split_list(*names)) {
      s.distributions.push_back(claimsim::DistributionSpec::parse(name));
    }
  }
  s.selection_rates = config.get_doubles("simulate.selection_rates", s.selection_rates);
  s.base.n = read_size(config, "simulate.n", s.base.n);
  s.base.iterations = read_size(config, "simulate.iterations", s.base.iterations);
  s.base.m = read_size(config, "simulate.m", s.base.m);
  s.base.noise_sigma = config.get_double("simulate.noise_sigma", s.base.noise_sigma);
  s.base.mode = claimsim::parse_mode(
      config.get_string("simulate.mode", claimsim::to_string(s.base.mode)));
  s.base.benefit = config.get_double("simulate.benefit", s.base.benefit);
  if (const auto names = config.find("simulate.mechanisms")) {
    s.base.mechanisms.clear();
    for (const auto& name : io::split_list(*names)) {
      s.base.mechanisms.push_back(claimsim::MechanismSpec::parse(name));
    }
  }

  s.sweep = config.get_bool("sweep.enabled", s.sweep);
  s.grid.kprime_rates = config.get_doubles("sweep.kprime_rates", s.grid.kprime_rates);
  s.grid.nprime_rates = config.get_doubles("sweep.nprime_rates", s.grid.nprime_rates);
  config.reject_unread();
  s.validate();
  return s;
}

std::string SimulateSettings::to_ini() const {
  IniWriter ini;
  write_run(ini, seed, threads);
  ini.section("simulate");
  ini.value("distributions", labels_of(distributions));
  ini.value("selection_rates", selection_rates);
  ini.value("n", std::uint64_t{base.n});
  ini.value("iterations", std::uint64_t{base.iterations});
  ini.value("m", std::uint64_t{base.m});
  ini.value("noise_sigma", base.noise_sigma);
  ini.comment("concurrent or sequential");
  ini.value("mode", claimsim::to_string(base.mode));
  ini.comment("sequential mode: claim increase for each winner, clipped at 1");
  ini.value("benefit", base.benefit);
  ini.comment("top-k always runs as the baseline");
  ini.value("mechanisms", labels_of(base.mechanisms));
  ini.section("sweep");
  ini.comment("partial lottery grid; replaces the mechanism list when enabled");
  ini.flag("enabled", sweep);
  ini.value("kprime_rates", grid.kprime_rates);
  ini.value("nprime_rates", grid.nprime_rates);
  return ini.str();
}

void SimulateSettings::validate() const {
  if (distributions.empty()) throw ConfigError("simulate.distributions is empty");
  if (selection_rates.empty()) throw ConfigError("simulate.selection_rates is empty");
  if (!sweep && base.mechanisms.empty() && base.m < 2) {
    throw ConfigError("nothing to report: no mechanisms and m < 2");
  }
  for (const auto& d : distributions) d.validate();
  for (double rate : selection_rates) {
    auto config = base;
    config.selection_rate = rate;
    config.threads = threads;
    config.validate();
    for (const auto& spec : base.mechanisms) spec.resolve(config.n, config.k());
  }
  if (sweep && (grid.kprime_rates.empty() || grid.nprime_rates.empty())) {
    throw ConfigError("sweep grid is empty");
  }
}

AllocateSettings AllocateSettings::defaults() {
  AllocateSettings s;
  s.schema = predict::job_seeker_schema();
  s.protocol.model = predict::ModelSpec::defaults(predict::ModelKind::kRandomForest);
  return s;
}

AllocateSettings AllocateSettings::from_config(const KeyValueConfig& config) {
  auto s = defaults();
  s.seed = config.get_uint("run.seed", s.seed);
  s.threads = read_threads(config, s.threads);

  s.dataset = config.get_path("dataset.path");
  if (config.has("dataset.label")) {
    // A dataset section describes its own columns; nothing is inherited
    // from the bundled fixture schema.
    s.schema = predict::DatasetSchema{};
  }
  s.schema.label_column = config.get_string("dataset.label", s.schema.label_column);
  s.schema.id_column = config.get_string("dataset.id", s.schema.id_column);
  s.schema.numeric = config.get_list("dataset.numeric", s.schema.numeric);
  s.schema.categorical = config.get_list("dataset.categorical", s.schema.categorical);
  s.schema.probability_column =
      config.get_string("dataset.probability", s.schema.probability_column);

  auto& p = s.protocol;
  const auto kind = predict::parse_model_kind(
      config.get_string("allocate.model", predict::to_string(p.model.kind)));
  if (kind != p.model.kind) p.model = predict::ModelSpec::defaults(kind);
  p.selection_rate = config.get_double("allocate.selection_rate", p.selection_rate);
  p.train_ratio = config.get_double("allocate.train_ratio", p.train_ratio);
  p.repetitions = read_size(config, "allocate.repetitions", p.repetitions);
  p.iterations = read_size(config, "allocate.iterations", p.iterations);
  if (const auto names = config.find("allocate.methods")) {
    p.methods.clear();
    for (const auto& name : io::split_list(*names)) {
      const auto method = uncertain::parse_method(name);
      if (method != uncertain::Method::kTopK) p.methods.push_back(method);
    }
  }
  p.kprime_rate = config.get_double("allocate.kprime_rate", p.kprime_rate);
  p.nprime_rate = config.get_double("allocate.nprime_rate", p.nprime_rate);

  auto& lr = p.model.logistic;
  lr.learning_rate = config.get_double("model.lr_learning_rate", lr.learning_rate);
  lr.tolerance = config.get_double("model.lr_tolerance", lr.tolerance);
  lr.max_iterations = read_size(config, "model.lr_max_iterations", lr.max_iterations);
  lr.l2 = config.get_double("model.lr_l2", lr.l2);
  auto& tree = p.model.tree;
  tree.max_depth = read_size(config, "model.tree_max_depth", tree.max_depth);
  tree.min_leaf = read_size(config, "model.tree_min_leaf", tree.min_leaf);
  tree.max_features = read_size(config, "model.tree_max_features", tree.max_features);
  auto& forest = p.model.forest;
  forest.trees = read_size(config, "model.forest_trees", forest.trees);
  forest.tree.max_depth =
      read_size(config, "model.forest_max_depth", forest.tree.max_depth);
  forest.tree.min_leaf = read_size(config, "model.forest_min_leaf", forest.tree.min_leaf);
  forest.max_features =
      read_size(config, "model.forest_max_features", forest.max_features);

  auto& e = p.ensemble;
  e.members = read_size(config, "ensemble.members", e.members);
  e.fraction = config.get_double("ensemble.fraction", e.fraction);
  e.sampling = predict::parse_sampling(
      config.get_string("ensemble.sampling", predict::to_string(e.sampling)));
  e.max_retries = read_size(config, "ensemble.max_retries", e.max_retries);
  p.vote_rule = predict::parse_vote_rule(
      config.get_string("ensemble.vote_rule", predict::to_string(p.vote_rule)));
  p.retrain_ensemble = config.get_bool("ensemble.retrain", p.retrain_ensemble);

  p.conformal.alpha = config.get_double("conformal.alpha", p.conformal.alpha);
  p.conformal.reference_cap =
      read_size(config, "conformal.reference_cap", p.conformal.reference_cap);
  p.calibration_fraction =
      config.get_double("conformal.calibration_fraction", p.calibration_fraction);
  p.outlier_mode = uncertain::parse_outlier_mode(
      config.get_string("conformal.mode", uncertain::to_string(p.outlier_mode)));

  auto& st = s.study_config;
  s.study = config.get_bool("study.enabled", s.study);
  st.m = read_size(config, "study.m", st.m);
  st.selection_rates = config.get_doubles("study.selection_rates", st.selection_rates);
  st.boundary_kprime_rates =
      config.get_doubles("study.boundary_kprime_rates", st.boundary_kprime_rates);
  st.alphas = config.get_doubles("study.alphas", st.alphas);

  config.reject_unread();
  s.validate();
  return s;
}

std::string AllocateSettings::to_ini() const {
  IniWriter ini;
  write_run(ini, seed, threads);

  ini.section("dataset");
  ini.comment("relative paths are resolved against this file's directory");
  ini.value("path", dataset ? dataset->generic_string() : std::string());
  ini.value("label", schema.label_column);
  ini.value("id", schema.id_column);
  ini.value("numeric", schema.numeric);
  ini.value("categorical", schema.categorical);
  ini.comment("optional known success probability, used for expected utility only");
  ini.value("probability", schema.probability_column);

  const auto& p = protocol;
  ini.section("allocate");
  ini.comment("logistic_regression, decision_tree or random_forest (lr, tree, rf)");
  ini.value("model", predict::to_string(p.model.kind));
  ini.value("selection_rate", p.selection_rate);
  ini.value("train_ratio", p.train_ratio);
  ini.value("repetitions", std::uint64_t{p.repetitions});
  ini.value("iterations", std::uint64_t{p.iterations});
  ini.comment("any of boundary, variance, outlier; top-k always runs");
  ini.value("methods", labels_of(p.methods));
  ini.comment("boundary randomization: k' = rate * k, n' = rate * n (0 means n' = k)");
  ini.value("kprime_rate", p.kprime_rate);
  ini.value("nprime_rate", p.nprime_rate);

  ini.section("model");
  ini.value("lr_learning_rate", p.model.logistic.learning_rate);
  ini.value("lr_tolerance", p.model.logistic.tolerance);
  ini.value("lr_max_iterations", std::uint64_t{p.model.logistic.max_iterations});
  ini.value("lr_l2", p.model.logistic.l2);
  ini.value("tree_max_depth", std::uint64_t{p.model.tree.max_depth});
  ini.value("tree_min_leaf", std::uint64_t{p.model.tree.min_leaf});
  ini.comment("features tried per split, 0 = all (tree) or floor(sqrt(d)) (forest)");
  ini.value("tree_max_features", std::uint64_t{p.model.tree.max_features});
  ini.value("forest_trees", std::uint64_t{p.model.forest.trees});
  ini.value("forest_max_depth", std::uint64_t{p.model.forest.tree.max_depth});
  ini.value("forest_min_leaf", std::uint64_t{p.model.forest.tree.min_leaf});
  ini.value("forest_max_features", std::uint64_t{p.model.forest.max_features});

  ini.section("ensemble");
  ini.value("members", std::uint64_t{p.ensemble.members});
  ini.value("fraction", p.ensemble.fraction);
  ini.value("sampling", predict::to_string(p.ensemble.sampling));
  ini.value("max_retries", std::uint64_t{p.ensemble.max_retries});
  ini.comment("main_threshold or member_topk");
  ini.value("vote_rule", predict::to_string(p.vote_rule));
  ini.flag("retrain", p.retrain_ensemble);

  ini.section("conformal");
  ini.value("alpha", p.conformal.alpha);
  ini.value("reference_cap", std::uint64_t{p.conformal.reference_cap});
  ini.value("calibration_fraction", p.calibration_fraction);
  ini.comment("unweighted or weighted lottery over flagged individuals");
  ini.value("mode", uncertain::to_string(p.outlier_mode));

  ini.section("study");
  ini.comment("SER against utility over m repeated allocations");
  ini.flag("enabled", study);
  ini.value("m", std::uint64_t{study_config.m});
  ini.value("selection_rates", study_config.selection_rates);
  ini.value("boundary_kprime_rates", study_config.boundary_kprime_rates);
  ini.value("alphas", study_config.alphas);
  return ini.str();
}

uncertain::ProtocolConfig AllocateSettings::resolved_protocol() const {
  auto p = protocol;
  p.seed = seed;
  p.threads = threads;
  p.ensemble.threads = threads;
  p.conformal.threads = threads;
  return p;
}

uncertain::StudyConfig AllocateSettings::resolved_study() const {
  auto st = study_config;
  st.protocol = resolved_protocol();
  return st;
}

void AllocateSettings::validate() const {
  schema.validate();
  resolved_protocol().validate();
  if (study) resolved_study().validate();
}

}  // namespace randalloc::cli

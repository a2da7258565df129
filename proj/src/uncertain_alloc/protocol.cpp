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

#include "randalloc/uncertain_alloc/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "randalloc/core/errors.hpp"
#include "randalloc/core/log.hpp"
#include "randalloc/core/parallel.hpp"
#include "randalloc/lottery/lottery.hpp"

namespace randalloc::uncertain {
namespace {

constexpr std::uint64_t kTrainStream = 0x747261696eULL;      // "train"
constexpr std::uint64_t kLotteryStream = 0x6c6f74746572ULL;  // "lotter"
constexpr std::uint64_t kCalibrationSalt = 0x63616cULL;      // "cal"

// Randomization parameters of one allocation.
struct MethodParams {
  double kprime_rate = 0.5;
  double nprime_rate = 0.0;
  double alpha = 0.2;
};

MethodParams params_of(const ProtocolConfig& config) {
  return {config.kprime_rate, config.nprime_rate, config.conformal.alpha};
}

RandomSource base_stream(const ProtocolConfig& config, std::size_t repetition) {
  return RandomSource(config.seed, hash_combine(kTrainStream, repetition));
}

RandomSource lottery_stream(const ProtocolConfig& config, std::size_t repetition,
                            std::size_t iteration, Method method, std::uint64_t draw) {
  const std::uint64_t key = hash_combine(
      hash_combine(kLotteryStream, repetition),
      hash_combine(iteration, hash_combine(static_cast<std::uint64_t>(method), draw)));
  return RandomSource(config.seed, key);
}

LotteryConfig boundary_config(std::size_t n, std::size_t k, const MethodParams& p) {
  LotteryConfig cfg;
  cfg.k = k;
  cfg.n = n;
  cfg.mechanism = Mechanism::kDecisionBoundary;
  cfg.k_prime = static_cast<std::size_t>(std::llround(p.kprime_rate * static_cast<double>(k)));
  cfg.n_prime = p.nprime_rate == 0.0
                    ? k
                    : static_cast<std::size_t>(
                          std::llround(p.nprime_rate * static_cast<double>(n)));
  cfg.validate();
  return cfg;
}

UncertainAllocationReport allocate(Method method, const RepetitionModels& models,
                                   const ProtocolConfig& config,
                                   const MethodParams& params,
                                   std::span<const double> votes, std::size_t members,
                                   RandomSource& rng) {
  const ClaimProfile& profile = models.profile;
  switch (method) {
    case Method::kTopK: {
      UncertainAllocationReport report;
      report.allocation = lottery::top_k(profile, models.k);
      report.k = models.k;
      report.n = profile.size();
      return report;
    }
    case Method::kBoundary:
      return boundary_randomize(profile, boundary_config(profile.size(), models.k, params),
                                rng);
    case Method::kVariance:
      if (votes.empty()) throw PreconditionError("variance randomization needs an ensemble");
      return variance_randomize(profile, votes, members, models.k, rng);
    case Method::kOutlier:
      if (!models.conformal) throw PreconditionError("outlier randomization needs p-values");
      return outlier_randomize(profile, models.conformal->p_values, params.alpha, models.k,
                               config.outlier_mode, rng);
  }
  throw ConfigError("unknown method");
}

double realized_utility(const UncertainAllocationReport& report,
                        const RepetitionModels& models) {
  UtilityGroundTruth truth;
  truth.realized = models.fold.test.labels;
  return metrics::utility(report.allocation, truth, models.k);
}

std::optional<double> oracle_utility(const UncertainAllocationReport& report,
                                     const RepetitionModels& models) {
  if (!models.fold.test.probabilities) return std::nullopt;
  UtilityGroundTruth truth;
  truth.probabilities = models.fold.test.probabilities;
  return metrics::expected_utility(report.allocation, truth, models.k);
}

Mean mean_of(const std::vector<double>& values) {
  Mean m;
  if (values.empty()) return m;
  for (double v : values) m.mean += v;
  const double n = static_cast<double>(values.size());
  m.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return m;
}

std::vector<Method> methods_with_baseline(const std::vector<Method>& methods) {
  std::vector<Method> out{Method::kTopK};
  for (Method m : methods) {
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  return out;
}

bool uses(const std::vector<Method>& methods, Method m) {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

predict::BootstrapEnsemble retrained_ensemble(const RepetitionModels& models,
                                              const ProtocolConfig& config,
                                              std::uint64_t key) {
  auto options = config.ensemble;
  options.threads = 1;
  const RandomSource rng =
      base_stream(config, models.repetition).derive(hash_combine(2, key + 1));
  return predict::bootstrap_ensemble(config.model, models.fold.train.features,
                                     models.fold.train.labels, models.fold.test.features,
                                     options, rng);
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kTopK:
      return "topk";
    case Method::kBoundary:
      return "boundary";
    case Method::kVariance:
      return "variance";
    case Method::kOutlier:
      return "outlier";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::kTopK, Method::kBoundary, Method::kVariance, Method::kOutlier}) {
    if (to_string(m) == text) return m;
  }
  if (text == "top_k") return Method::kTopK;
  if (text == "decision_boundary") return Method::kBoundary;
  if (text == "outliers") return Method::kOutlier;
  throw ConfigError(fmt::format("unknown allocation method '{}'", text));
}

void ProtocolConfig::validate() const {
  if (!(selection_rate > 0.0 && selection_rate <= 1.0)) {
    throw ConfigError(fmt::format("selection rate {} outside (0, 1]", selection_rate));
  }
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw ConfigError(fmt::format("train ratio {} outside (0, 1)", train_ratio));
  }
  if (repetitions == 0) throw ConfigError("repetitions must be >= 1");
  if (iterations == 0) throw ConfigError("iterations must be >= 1");
  if (!(kprime_rate >= 0.0 && kprime_rate <= 1.0)) {
    throw ConfigError(fmt::format("k' rate {} outside [0, 1]", kprime_rate));
  }
  if (!(nprime_rate >= 0.0 && nprime_rate <= 1.0)) {
    throw ConfigError(fmt::format("n' rate {} outside [0, 1]", nprime_rate));
  }
  if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0)) {
    throw ConfigError("calibration fraction must lie in (0, 1)");
  }
  ensemble.validate();
  conformal.validate();
}

RepetitionModels train_repetition(const predict::TabularDataset& data,
                                  const ProtocolConfig& config,
                                  std::size_t repetition, bool need_ensemble,
                                  bool need_conformal) {
  config.validate();
  RepetitionModels models;
  models.repetition = repetition;
  models.fold = predict::make_fold(data, config.train_ratio, repetition, config.seed);
  const auto& train = models.fold.train;
  const auto& test = models.fold.test;
  if (test.rows() == 0) throw ConfigError("test fold is empty");
  const RandomSource base = base_stream(config, repetition);

  RandomSource model_rng = base.derive(1);
  const auto model = predict::train(config.model, train.features, train.labels, model_rng);
  models.main = predict::predict(*model, test.features);
  models.profile = models.main.profile(test.ids);
  models.k = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(config.selection_rate * static_cast<double>(test.rows()))));

  if (need_ensemble) {
    auto options = config.ensemble;
    options.threads = config.threads;
    models.ensemble = predict::bootstrap_ensemble(config.model, train.features,
                                                  train.labels, test.features, options,
                                                  base.derive(2));
    models.votes = predict::vote_fractions(*models.ensemble, models.main.scores,
                                           models.k, config.vote_rule);
  }

  if (need_conformal) {
    const auto parts = predict::split(train.rows(), 1.0 - config.calibration_fraction,
                                      repetition, hash_combine(config.seed, kCalibrationSalt));
    if (parts.test.empty()) throw ConfigError("calibration fold is empty");
    auto options = config.conformal;
    options.threads = config.threads;
    RandomSource rng = base.derive(3);
    models.conformal = predict::conformal_pvalues(
        train.features.select_rows(parts.train), train.features.select_rows(parts.test),
        test.features, options, rng);
  }
  logger().info("repetition {}: train {} rows, pool {} rows, k={}, model {}", repetition,
                train.rows(), test.rows(), models.k, models.main.model);
  return models;
}

UncertainAllocationReport run_method(Method method, const RepetitionModels& models,
                                     const ProtocolConfig& config,
                                     std::size_t iteration, std::uint64_t draw) {
  RandomSource rng = lottery_stream(config, models.repetition, iteration, method, draw);
  const std::size_t members = models.ensemble ? models.ensemble->members() : 0;
  return allocate(method, models, config, params_of(config), models.votes, members, rng);
}

const MethodSummary& ProtocolResult::summary(Method method) const {
  for (const auto& s : methods) {
    if (s.method == method) return s;
  }
  throw PreconditionError(fmt::format("method '{}' was not run", to_string(method)));
}

ProtocolResult run_protocol(const predict::TabularDataset& data,
                            const ProtocolConfig& config) {
  config.validate();
  const auto methods = methods_with_baseline(config.methods);
  const bool need_ensemble = uses(methods, Method::kVariance);
  const bool need_conformal = uses(methods, Method::kOutlier);

  ProtocolResult result;
  result.config = config;
  result.rows = data.rows();
  result.positive_rate = data.positive_rate();

  struct Sample {
    double kprime_rate = 0.0;
    double nprime_rate = 0.0;
    double utility = 0.0;
    double matched = 0.0;
    double topk = 0.0;
    std::optional<double> expected;
    std::size_t demoted = 0;
    std::size_t score_filled = 0;
    std::vector<std::uint8_t> outcomes;
  };
  // samples[method][rep * iterations + iteration]
  const std::size_t total = config.repetitions * config.iterations;
  std::vector<std::vector<Sample>> samples(methods.size(), std::vector<Sample>(total));
  std::vector<std::unordered_map<IndividualId, SelectionFrequency>> freq(methods.size());

  for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
    const auto models = train_repetition(data, config, rep, need_ensemble, need_conformal);
    RandomSource unused(0);
    const double topk_utility = realized_utility(
        allocate(Method::kTopK, models, config, params_of(config), {}, 0, unused), models);

    RepetitionSummary summary;
    summary.repetition = rep;
    summary.pool = models.profile.size();
    summary.k = models.k;
    summary.model = models.main.model;
    summary.positive_rate = models.fold.test.positive_rate();
    summary.topk_utility = topk_utility;
    if (models.conformal) {
      summary.flagged = models.conformal->flagged_count();
      summary.q_hat = models.conformal->q_hat;
      summary.reference_size = models.conformal->reference_size;
      summary.calibration_size = models.conformal->calibration_scores.size();
    }
    result.repetitions.push_back(summary);

    for (std::size_t i = 0; i < models.profile.size(); ++i) {
      PredictionRow row;
      row.repetition = rep;
      row.id = models.profile.id(i);
      row.score = models.main.scores[i];
      if (!models.votes.empty()) row.vote_fraction = models.votes[i];
      if (models.conformal) row.p_value = models.conformal->p_values[i];
      result.predictions.push_back(row);
    }

    parallel_for(config.iterations, config.threads, [&](std::size_t it) {
      std::vector<double> votes;
      std::size_t members = models.ensemble ? models.ensemble->members() : 0;
      if (need_ensemble && config.retrain_ensemble) {
        const auto ensemble = retrained_ensemble(models, config, it);
        votes = predict::vote_fractions(ensemble, models.main.scores, models.k,
                                        config.vote_rule);
        members = ensemble.members();
      }
      const std::span<const double> vote_view =
          votes.empty() ? std::span<const double>(models.votes) : votes;
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        RandomSource rng = lottery_stream(config, rep, it, methods[mi], 0);
        const auto report =
            allocate(methods[mi], models, config, params_of(config), vote_view, members, rng);
        RandomSource matched_rng = lottery_stream(config, rep, it, methods[mi], 1);
        const auto matched =
            boundary_randomize(models.profile, matched_boundary_config(report), matched_rng);
        Sample& s = samples[mi][rep * config.iterations + it];
        s.kprime_rate = report.kprime_rate();
        s.nprime_rate = report.nprime_rate();
        s.utility = realized_utility(report, models);
        s.matched = realized_utility(matched, models);
        s.topk = topk_utility;
        s.expected = oracle_utility(report, models);
        s.demoted = report.demoted;
        s.score_filled = report.score_filled;
        s.outcomes = report.allocation.outcomes;
      }
    });

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      for (std::size_t it = 0; it < config.iterations; ++it) {
        const auto& outcomes = samples[mi][rep * config.iterations + it].outcomes;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
          auto& f = freq[mi][models.profile.id(i)];
          f.id = models.profile.id(i);
          ++f.draws;
          f.selected += outcomes[i];
        }
      }
    }
  }

  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    MethodSummary s;
    s.method = methods[mi];
    std::vector<double> kr, nr, util, matched, topk, expected;
    for (const auto& sample : samples[mi]) {
      kr.push_back(sample.kprime_rate);
      nr.push_back(sample.nprime_rate);
      util.push_back(sample.utility);
      matched.push_back(sample.matched);
      topk.push_back(sample.topk);
      if (sample.expected) expected.push_back(*sample.expected);
      s.demoted += sample.demoted;
      s.score_filled += sample.score_filled;
    }
    s.kprime_rate = mean_of(kr);
    s.nprime_rate = mean_of(nr);
    s.utility = mean_of(util);
    s.utility_boundary_matched = mean_of(matched);
    s.utility_topk = mean_of(topk);
    if (expected.size() == samples[mi].size()) s.expected_utility = mean_of(expected);
    result.methods.push_back(s);

    std::vector<SelectionFrequency> rows;
    rows.reserve(freq[mi].size());
    for (const auto& [id, f] : freq[mi]) rows.push_back(f);
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    result.frequencies.push_back(std::move(rows));
  }
  return result;
}

void StudyConfig::validate() const {
  protocol.validate();
  if (m < 2) throw PreconditionError("SER needs m > 1 decision-makers");
  if (selection_rates.empty()) throw ConfigError("no selection rates given");
  for (double r : selection_rates) {
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("selection rate outside (0, 1]");
  }
}

StudyResult ser_tradeoff_study(const predict::TabularDataset& data,
                               const StudyConfig& config) {
  config.validate();
  const auto methods = methods_with_baseline(config.protocol.methods);
  const bool need_ensemble = uses(methods, Method::kVariance);
  const bool need_conformal = uses(methods, Method::kOutlier);

  struct Variant {
    Method method;
    MethodParams params;
    std::string label;
  };

  StudyResult result;
  for (double rate : config.selection_rates) {
    ProtocolConfig protocol = config.protocol;
    protocol.selection_rate = rate;

    std::vector<Variant> variants;
    for (Method method : methods) {
      MethodParams base = params_of(protocol);
      switch (method) {
        case Method::kBoundary:
          for (double kr : config.boundary_kprime_rates) {
            MethodParams p = base;
            p.kprime_rate = kr;
            p.nprime_rate = 0.0;
            variants.push_back({method, p, fmt::format("boundary(k'/k={})", kr)});
          }
          break;
        case Method::kOutlier:
          for (double a : config.alphas) {
            MethodParams p = base;
            p.alpha = a;
            variants.push_back({method, p, fmt::format("outlier(alpha={})", a)});
          }
          break;
        default:
          variants.push_back({method, base, std::string(to_string(method))});
      }
    }

    struct Accumulator {
      std::vector<double> utility;
      std::vector<double> ser;
      std::vector<double> kprime;
      std::vector<double> nprime;
      bool skipped = false;
    };
    std::vector<Accumulator> acc(variants.size());
    std::vector<double> topk_utility;

    for (std::size_t rep = 0; rep < protocol.repetitions; ++rep) {
      const auto models =
          train_repetition(data, protocol, rep, need_ensemble, need_conformal);
      for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        const auto& v = variants[vi];
        if (v.method == Method::kBoundary) {
          try {
            boundary_config(models.profile.size(), models.k, v.params);
          } catch (const ConfigError& e) {
            logger().warn("study: skipping {} at rate {}: {}", v.label, rate, e.what());
            acc[vi].skipped = true;
            continue;
          }
        }
        std::vector<double> utility(protocol.iterations);
        std::vector<double> ser(protocol.iterations);
        std::vector<double> kprime(protocol.iterations);
        std::vector<double> nprime(protocol.iterations);
        parallel_for(protocol.iterations, protocol.threads, [&](std::size_t it) {
          metrics::EnsembleOutcomes outcomes(models.profile.size());
          double u = 0.0;
          double kr = 0.0;
          double nr = 0.0;
          for (std::size_t j = 0; j < config.m; ++j) {
            std::vector<double> fresh_votes;
            std::size_t members = models.ensemble ? models.ensemble->members() : 0;
            if (v.method == Method::kVariance && protocol.retrain_ensemble) {
              const auto e = retrained_ensemble(
                  models, protocol, hash_combine(it, j));
              fresh_votes = predict::vote_fractions(e, models.main.scores, models.k,
                                                    protocol.vote_rule);
              members = e.members();
            }
            const std::span<const double> votes =
                fresh_votes.empty() ? std::span<const double>(models.votes) : fresh_votes;
            RandomSource rng = lottery_stream(protocol, rep, it, v.method,
                                              hash_combine(vi, j));
            const auto report =
                allocate(v.method, models, protocol, v.params, votes, members, rng);
            outcomes.add_row(report.allocation.outcomes);
            u += realized_utility(report, models);
            kr += report.kprime_rate();
            nr += report.nprime_rate();
          }
          const double m = static_cast<double>(config.m);
          utility[it] = u / m;
          ser[it] = metrics::ser(outcomes);
          kprime[it] = kr / m;
          nprime[it] = nr / m;
        });
        auto& a = acc[vi];
        a.utility.insert(a.utility.end(), utility.begin(), utility.end());
        a.ser.insert(a.ser.end(), ser.begin(), ser.end());
        a.kprime.insert(a.kprime.end(), kprime.begin(), kprime.end());
        a.nprime.insert(a.nprime.end(), nprime.begin(), nprime.end());
        if (v.method == Method::kTopK) {
          topk_utility.insert(topk_utility.end(), utility.begin(), utility.end());
        }
      }
    }

    const double baseline = mean_of(topk_utility).mean;
    metrics::FrontierPoint topk_point;
    std::vector<StudyPoint> rate_points;
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
      if (acc[vi].utility.empty()) continue;
      StudyPoint p;
      p.method = variants[vi].method;
      p.label = variants[vi].label;
      p.selection_rate = rate;
      p.kprime_rate = mean_of(acc[vi].kprime).mean;
      p.nprime_rate = mean_of(acc[vi].nprime).mean;
      p.utility = mean_of(acc[vi].utility).mean;
      p.utility_delta = baseline - p.utility;
      p.ser = mean_of(acc[vi].ser).mean;
      if (p.method == Method::kTopK) {
        topk_point = {p.utility_delta, p.ser, {}, p.label};
      }
      rate_points.push_back(p);
    }
    for (Method method : methods) {
      if (method == Method::kTopK) continue;
      std::vector<metrics::FrontierPoint> points{topk_point};
      for (const auto& p : rate_points) {
        if (p.method == method) points.push_back({p.utility_delta, p.ser, {}, p.label});
      }
      result.frontiers[fmt::format("{}@{}", to_string(method), rate)] =
          metrics::frontier(std::move(points));
    }
    result.points.insert(result.points.end(), rate_points.begin(), rate_points.end());
  }
  return result;
}

}  // namespace randalloc::uncertain

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

#include "randalloc/claimsim/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "randalloc/core/errors.hpp"

namespace randalloc::claimsim {
namespace {

double truncated_normal(double mean, double sigma, RandomSource& rng) {
  for (;;) {
    const double x = mean + sigma * rng.normal();
    if (x >= 0.0 && x <= 1.0) return x;
  }
}

bool parametric(Family family) { return family != Family::kUniform; }

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::kUniform:
      return "uniform";
    case Family::kNormal:
      return "normal";
    case Family::kInvertedNormal:
      return "inverted_normal";
    case Family::kPareto:
      return "pareto";
    case Family::kInvertedPareto:
      return "inverted_pareto";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : kAllFamilies) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError(fmt::format("unknown claim distribution '{}'", name));
}

DistributionSpec DistributionSpec::standard(Family family) {
  switch (family) {
    case Family::kNormal:
    case Family::kInvertedNormal:
      return {family, 0.15};
    case Family::kPareto:
    case Family::kInvertedPareto:
      return {family, 2.0};
    case Family::kUniform:
      break;
  }
  return {Family::kUniform, 0.0};
}

DistributionSpec DistributionSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const Family family = parse_family(text.substr(0, colon));
  DistributionSpec spec = standard(family);
  if (colon != std::string_view::npos) {
    const auto value = text.substr(colon + 1);
    double param = 0.0;
    const auto [ptr, ec] =
        std::from_chars(value.data(), value.data() + value.size(), param);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw ConfigError(fmt::format("bad distribution parameter in '{}'", text));
    }
    spec.param = param;
  }
  spec.validate();
  return spec;
}

void DistributionSpec::validate() const {
  if (parametric(family) && !(param > 0.0 && std::isfinite(param))) {
    throw ConfigError(fmt::format("{} needs a positive parameter, got {}",
                                  to_string(family), param));
  }
}

std::string DistributionSpec::label() const {
  if (!parametric(family)) return std::string(to_string(family));
  return fmt::format("{}:{}", to_string(family), param);
}

ClaimProfile sample_claims(const DistributionSpec& spec, std::size_t n,
                           RandomSource& rng) {
  spec.validate();
  std::vector<double> claims(n);
  for (auto& c : claims) {
    switch (spec.family) {
      case Family::kUniform:
        c = rng.uniform();
        break;
      case Family::kNormal:
        c = truncated_normal(0.5, spec.param, rng);
        break;
      case Family::kInvertedNormal:
        // Pick the component, then condition the whole mixture on [0, 1]
        // by rejecting the draw (both components lose the same mass).
        for (;;) {
          const double mean = rng.uniform() < 0.5 ? 0.0 : 1.0;
          const double x = mean + spec.param * rng.normal();
          if (x >= 0.0 && x <= 1.0) {
            c = x;
            break;
          }
        }
        break;
      case Family::kPareto:
      case Family::kInvertedPareto: {
        // x = u^(-1/alpha) >= 1, so 1/x = u^(1/alpha) lies in (0, 1).
        const double inv = std::pow(rng.uniform_open(), 1.0 / spec.param);
        c = spec.family == Family::kPareto ? 1.0 - inv : inv;
        break;
      }
    }
  }
  return ClaimProfile(std::move(claims));
}

ClaimProfile add_decision_maker_noise(const ClaimProfile& claims, double sigma,
                                      RandomSource& rng) {
  if (!(sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  if (sigma == 0.0) return claims;
  std::vector<double> noisy(claims.claims().begin(), claims.claims().end());
  for (auto& c : noisy) c = std::clamp(c + sigma * rng.normal(), 0.0, 1.0);
  return claims.with_claims(std::move(noisy));
}

}  // namespace randalloc::claimsim

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

// Claim distributions on [0, 1].
//
//   Uniform         U[0, 1)
//   Normal          N(0.5, s^2) conditioned on [0, 1]
//   InvertedNormal  0.5 N(0, s^2) + 0.5 N(1, s^2) conditioned on [0, 1]
//   Pareto          1 - 1/x, x ~ Pareto(a, scale 1): density a (1 - c)^(a-1),
//                   mass at weak claims
//   InvertedPareto  1/x: CDF c^a, mass at strong claims
//
// Truncation is by rejection, so Normal and InvertedNormal are true
// conditional distributions.

#ifndef RANDALLOC_CLAIMSIM_DISTRIBUTIONS_HPP_
#define RANDALLOC_CLAIMSIM_DISTRIBUTIONS_HPP_

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "randalloc/core/random.hpp"
#include "randalloc/core/types.hpp"

namespace randalloc::claimsim {

enum class Family { kUniform, kNormal, kInvertedNormal, kPareto, kInvertedPareto };

inline constexpr std::array<Family, 5> kAllFamilies{
    Family::kUniform, Family::kNormal, Family::kInvertedNormal,
    Family::kPareto, Family::kInvertedPareto};

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

struct DistributionSpec {
  Family family = Family::kUniform;
  // Standard deviation for the normal family, shape for the Pareto family;
  // ignored for Uniform.
  double param = 0.0;

  // sigma = 0.15 for the normal family, alpha = 2 for the Pareto family.
  static DistributionSpec standard(Family family);
  // "normal:0.15", "pareto:2", "uniform", or a bare family name for the
  // standard parameter.
  static DistributionSpec parse(std::string_view text);

  void validate() const;
  std::string label() const;
};

ClaimProfile sample_claims(const DistributionSpec& spec, std::size_t n,
                           RandomSource& rng);

// c_i + N(0, sigma^2), clipped to [0, 1]. Consumes exactly two words per
// individual when sigma > 0, so equal streams perturb equally.
ClaimProfile add_decision_maker_noise(const ClaimProfile& claims, double sigma,
                                      RandomSource& rng);

}  // namespace randalloc::claimsim

#endif  // RANDALLOC_CLAIMSIM_DISTRIBUTIONS_HPP_

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

#ifndef RANDALLOC_CORE_COMPLIANCE_HPP_
#define RANDALLOC_CORE_COMPLIANCE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "randalloc/core/types.hpp"

namespace randalloc {

// Positions ordered by descending claim, ties by ascending id.
std::vector<std::size_t> canonical_order(const ClaimProfile& claims);
// Positions ordered by descending score, ties by ascending position.
std::vector<std::size_t> canonical_order(std::span<const double> scores);

// Ids ordered by descending claim, ties by ascending id.
std::vector<IndividualId> canonical_sort(const ClaimProfile& claims);

enum class BfCondition {
  // c_i > c_j must imply w_i > w_j.
  kStrongerClaimHigherWeight,
  // c_i > 0 must imply w_i > 0.
  kPositiveClaimPositiveWeight,
};

struct BfViolation {
  BfCondition condition;
  std::size_t round;
  IndividualId i;
  // Equal to i for kPositiveClaimPositiveWeight.
  IndividualId j;
};

struct ComplianceReport {
  bool bf1_ok = true;
  bool bf2_ok = true;
  // At most `max_violations` entries; violation_count has the full tally.
  std::vector<BfViolation> violations;
  std::size_t violation_count = 0;

  bool ok() const { return bf1_ok && bf2_ok; }
};

// Checks both Broome-fairness conditions on every recorded round, over all
// pairs of surviving individuals. Throws StructuralError when a round names
// an id missing from `claims`.
ComplianceReport check_bf_compliance(
    const ClaimProfile& claims,
    std::span<const SelectionWeights> weights_per_round,
    std::size_t max_violations = 1000);

}  // namespace randalloc

#endif  // RANDALLOC_CORE_COMPLIANCE_HPP_

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

#include "randalloc/core/compliance.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "randalloc/core/errors.hpp"

namespace randalloc {

std::vector<std::size_t> canonical_order(const ClaimProfile& claims) {
  std::vector<std::size_t> order(claims.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto values = claims.claims();
  const auto ids = claims.ids();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return ids[a] < ids[b];
  });
  return order;
}

std::vector<std::size_t> canonical_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

std::vector<IndividualId> canonical_sort(const ClaimProfile& claims) {
  const auto order = canonical_order(claims);
  std::vector<IndividualId> ids;
  ids.reserve(order.size());
  for (std::size_t p : order) ids.push_back(claims.id(p));
  return ids;
}

ComplianceReport check_bf_compliance(
    const ClaimProfile& claims,
    std::span<const SelectionWeights> weights_per_round,
    std::size_t max_violations) {
  std::unordered_map<IndividualId, std::size_t> position_of;
  position_of.reserve(claims.size());
  for (std::size_t p = 0; p < claims.size(); ++p) position_of[claims.id(p)] = p;

  ComplianceReport report;
  auto record = [&](BfViolation v) {
    ++report.violation_count;
    if (report.violations.size() < max_violations) {
      report.violations.push_back(v);
    }
  };

  struct Entry {
    double claim;
    double weight;
    IndividualId id;
  };
  std::vector<Entry> entries;
  for (const SelectionWeights& round : weights_per_round) {
    const auto survivors = round.survivors();
    const auto weights = round.weights();
    entries.clear();
    for (std::size_t s = 0; s < survivors.size(); ++s) {
      auto it = position_of.find(survivors[s]);
      if (it == position_of.end()) {
        throw StructuralError(fmt::format(
            "round {} names id {} absent from the claim profile",
            round.round(), survivors[s]));
      }
      entries.push_back({claims.claim(it->second), weights[s], survivors[s]});
    }

    for (const Entry& e : entries) {
      if (e.claim > 0.0 && !(e.weight > 0.0)) {
        report.bf2_ok = false;
        record({BfCondition::kPositiveClaimPositiveWeight, round.round(), e.id,
                e.id});
      }
    }

    // Ascending claims; every group must strictly outweigh the maximum
    // weight seen among all weaker claims.
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.claim < b.claim; });
    bool round_ok = true;
    double weaker_max = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < entries.size() && round_ok;) {
      std::size_t end = g;
      double group_min = std::numeric_limits<double>::infinity();
      double group_max = -std::numeric_limits<double>::infinity();
      while (end < entries.size() && entries[end].claim == entries[g].claim) {
        group_min = std::min(group_min, entries[end].weight);
        group_max = std::max(group_max, entries[end].weight);
        ++end;
      }
      if (group_min <= weaker_max) round_ok = false;
      weaker_max = std::max(weaker_max, group_max);
      g = end;
    }
    if (round_ok) continue;

    report.bf1_ok = false;
    for (std::size_t a = 0; a < entries.size(); ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        // entries[a] has the larger (or equal) claim.
        if (entries[a].claim > entries[b].claim &&
            entries[a].weight <= entries[b].weight) {
          record({BfCondition::kStrongerClaimHigherWeight, round.round(),
                  entries[a].id, entries[b].id});
        }
      }
    }
  }
  return report;
}

}  // namespace randalloc

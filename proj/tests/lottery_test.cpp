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

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "oracles/enumeration.hpp"
#include "randalloc/core/compliance.hpp"
#include "randalloc/core/errors.hpp"
#include "randalloc/lottery/lottery.hpp"
#include "randalloc/lottery/sum_tree.hpp"

namespace randalloc::lottery {
namespace {

std::vector<double> inclusion_frequencies(std::size_t n, std::size_t draws,
                                          auto&& run) {
  std::vector<double> freq(n, 0.0);
  for (std::size_t d = 0; d < draws; ++d) {
    RandomSource rng(1234, d);
    const AllocationResult r = run(rng);
    for (std::size_t i = 0; i < n; ++i) freq[i] += r.outcomes[i];
  }
  for (auto& f : freq) f /= static_cast<double>(draws);
  return freq;
}

void check_within_3_sigma(const std::vector<double>& observed,
                          const std::vector<double>& expected,
                          std::size_t draws) {
  REQUIRE(observed.size() == expected.size());
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double sigma = oracle::binomial_sigma(expected[i], draws);
    CAPTURE(i);
    CHECK(std::abs(observed[i] - expected[i]) <= 3.0 * sigma + 1e-12);
  }
}

ClaimProfile random_profile(RandomSource& rng, std::size_t n) {
  std::vector<double> claims(n);
  for (auto& c : claims) c = 0.01 + 0.99 * rng.uniform();
  return ClaimProfile(claims);
}

TEST_CASE("SumTree inverts the cumulative weights") {
  const std::vector<double> w{0.0, 2.0, 0.0, 1.0, 3.0};
  SumTree tree(w);
  CHECK(tree.total() == 6.0);
  CHECK(tree.find(0.0) == 1);
  CHECK(tree.find(1.999) == 1);
  CHECK(tree.find(2.0) == 3);
  CHECK(tree.find(3.5) == 4);
  CHECK(tree.find(6.0) == 4);  // rounding overshoot lands on the last mass
  tree.set(4, 0.0);
  CHECK(tree.total() == 3.0);
  CHECK(tree.find(2.9999) == 3);
  CHECK(tree.find(10.0) == 3);
}

TEST_CASE("bf_weights normalizes surviving claims") {
  CHECK(*bf_weights(std::vector<double>{0.5, 0.3, 0.2}) ==
        std::vector<double>{0.5, 0.3, 0.2});
  CHECK(*bf_weights(std::vector<double>{0.4, 0.4}) ==
        std::vector<double>{0.5, 0.5});
  const auto w = *bf_weights(std::vector<double>{0.9, 0.1, 0.0});
  CHECK(w[0] == doctest::Approx(0.9));
  CHECK(w[1] == doctest::Approx(0.1));
  CHECK(w[2] == 0.0);
  CHECK_FALSE(bf_weights(std::vector<double>{0.0, 0.0}).has_value());
}

TEST_CASE("single-round BF lottery selects proportionally to claims") {
  const ClaimProfile profile({0.5, 0.3, 0.2});
  const std::size_t draws = 100000;
  const auto freq = inclusion_frequencies(3, draws, [&](RandomSource& rng) {
    return bf_lottery(profile, 1, rng).result;
  });
  check_within_3_sigma(freq, {0.5, 0.3, 0.2}, draws);
}

TEST_CASE("two-round BF lottery matches the enumerated selection sequences") {
  const std::vector<double> claims{0.5, 0.3, 0.2};
  // Closed form for id 2: it is excluded when the two rounds pick {0, 1}.
  const double closed_form = 1.0 - (0.5 * (0.3 / 0.5) + 0.3 * (0.5 / 0.7));
  const auto exact = oracle::inclusion_probabilities(claims, 2);
  CHECK(exact[2] == doctest::Approx(closed_form).epsilon(1e-12));
  CHECK(exact[2] == doctest::Approx(0.48571428571428577).epsilon(1e-12));

  const std::size_t draws = 100000;
  const ClaimProfile profile(claims);
  const auto freq = inclusion_frequencies(3, draws, [&](RandomSource& rng) {
    return bf_lottery(profile, 2, rng).result;
  });
  check_within_3_sigma(freq, exact, draws);
}

TEST_CASE("k = n selects everyone") {
  RandomSource rng(1);
  const ClaimProfile profile({0.1, 0.0, 0.7, 0.3});
  const auto bf = bf_lottery(profile, 4, rng).result;
  CHECK(bf.selected_count() == 4);
  CHECK(unweighted_lottery(profile, 4, rng).selected_count() == 4);
  CHECK(top_k(profile, 4).selected_count() == 4);
}

TEST_CASE("top_k picks the strongest claims with id tie-break") {
  const auto r = top_k(ClaimProfile({0.2, 0.9, 0.5}), 2);
  CHECK(r.outcomes == std::vector<std::uint8_t>{0, 1, 1});
  CHECK(r.selected_order == std::vector<IndividualId>{1, 2});
  const auto tie = top_k(ClaimProfile({0.5, 0.5, 0.1}), 1);
  CHECK(tie.outcomes == std::vector<std::uint8_t>{1, 0, 0});
  CHECK_THROWS_AS(top_k(ClaimProfile({0.5}), 2), ConfigError);
}

TEST_CASE("unweighted lottery gives everyone probability k/n") {
  const std::size_t draws = 100000;
  const ClaimProfile two({0.9, 0.1});
  check_within_3_sigma(inclusion_frequencies(2, draws,
                                             [&](RandomSource& rng) {
                                               return unweighted_lottery(two, 1, rng);
                                             }),
                       {0.5, 0.5}, draws);
  const ClaimProfile five({0.9, 0.1, 0.5, 0.0, 0.3});
  check_within_3_sigma(inclusion_frequencies(5, draws,
                                             [&](RandomSource& rng) {
                                               return unweighted_lottery(five, 2, rng);
                                             }),
                       std::vector<double>(5, 0.4), draws);
}

TEST_CASE("partial lottery selects the top outright and splits the band") {
  const std::vector<double> claims{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2};
  const LotteryConfig cfg{.k = 2, .n = 8, .k_prime = 1, .n_prime = 2,
                          .mechanism = Mechanism::kPartialBF};
  const auto exact = oracle::partial_inclusion_probabilities(claims, 2, 1, 2);
  CHECK(exact[0] == 1.0);
  CHECK(exact[1] == doctest::Approx(0.8 / 1.5));
  CHECK(exact[2] == doctest::Approx(0.7 / 1.5));
  for (std::size_t i = 3; i < 8; ++i) CHECK(exact[i] == 0.0);

  const ClaimProfile profile(claims);
  const std::size_t draws = 100000;
  const auto freq = inclusion_frequencies(8, draws, [&](RandomSource& rng) {
    return partial_bf_lottery(profile, cfg, rng).result;
  });
  check_within_3_sigma(freq, exact, draws);
}

TEST_CASE("partial lottery with k' = k and n' = n is the full BF lottery") {
  const std::vector<double> claims{0.5, 0.3, 0.2, 0.6};
  const auto partial = oracle::partial_inclusion_probabilities(claims, 2, 2, 4);
  const auto full = oracle::inclusion_probabilities(claims, 2);
  for (std::size_t i = 0; i < claims.size(); ++i) {
    CHECK(partial[i] == doctest::Approx(full[i]));
  }
  const ClaimProfile profile(claims);
  const LotteryConfig cfg{.k = 2, .n = 4, .k_prime = 2, .n_prime = 4,
                          .mechanism = Mechanism::kPartialBF};
  const std::size_t draws = 100000;
  check_within_3_sigma(inclusion_frequencies(4, draws,
                                             [&](RandomSource& rng) {
                                               return partial_bf_lottery(profile, cfg, rng).result;
                                             }),
                       full, draws);
}

TEST_CASE("partial lottery bands follow rank percentiles") {
  // k/n = 0.25, k' = k/2, n' = k: outright above the 87.5th percentile,
  // randomized over the 62.5th-87.5th band.
  const std::size_t n = 80;
  const std::size_t k = 20;
  std::vector<double> claims(n);
  for (std::size_t i = 0; i < n; ++i) claims[i] = (i + 1.0) / (n + 1.0);
  const ClaimProfile profile(claims);
  const LotteryConfig cfg{.k = k, .n = n, .k_prime = 10, .n_prime = 20,
                          .mechanism = Mechanism::kPartialBF};
  RandomSource rng(77);
  const auto sel = partial_bf_lottery(profile, cfg, rng, {.record_trace = true});
  CHECK(sel.trace.pool_begin == 10);
  CHECK(sel.trace.pool_end == 30);
  for (auto id : sel.trace.deterministic) {
    CHECK(static_cast<double>(id + 1) / n > 0.875);
  }
  for (const auto& round : sel.trace.rounds) {
    for (auto id : round.weights.survivors()) {
      const double percentile = static_cast<double>(id + 1) / n;
      CHECK(percentile > 0.625);
      CHECK(percentile <= 0.875);
    }
  }
  CHECK(sel.result.selected_count() == k);
}

TEST_CASE("partial lottery rejects out-of-bounds configurations") {
  const ClaimProfile profile({0.9, 0.8, 0.7, 0.6});
  RandomSource rng(1);
  CHECK_THROWS_AS(partial_bf_lottery(profile,
                                     {.k = 2, .n = 4, .k_prime = 1, .n_prime = 4,
                                      .mechanism = Mechanism::kPartialBF},
                                     rng),
                  ConfigError);
  CHECK_THROWS_AS(partial_bf_lottery(profile,
                                     {.k = 2, .n = 4, .k_prime = 2, .n_prime = 2,
                                      .mechanism = Mechanism::kPartialBF},
                                     rng),
                  ConfigError);
  CHECK_THROWS_AS(partial_bf_lottery(profile,
                                     {.k = 2, .n = 5, .k_prime = 1, .n_prime = 2,
                                      .mechanism = Mechanism::kPartialBF},
                                     rng),
                  StructuralError);
}

TEST_CASE("partial lottery with k' = 0 reproduces top-k exactly") {
  RandomSource gen(8);
  for (int rep = 0; rep < 20; ++rep) {
    const auto profile = random_profile(gen, 30);
    RandomSource rng(rep);
    const auto partial =
        partial_bf_lottery(profile,
                           {.k = 7, .n = 30, .k_prime = 0, .n_prime = 0,
                            .mechanism = Mechanism::kPartialBF},
                           rng)
            .result;
    const auto top = top_k(profile, 7);
    CHECK(partial.outcomes == top.outcomes);
    CHECK(partial.selected_order == top.selected_order);
  }
}

TEST_CASE("traced BF rounds pass the compliance checker") {
  RandomSource gen(21);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + gen.below(30);
    const auto profile = random_profile(gen, n);
    RandomSource rng(rep);
    const auto sel =
        bf_lottery(profile, 1 + gen.below(n), rng, {.record_trace = true});
    const auto report = check_bf_compliance(profile, sel.trace.weights());
    CHECK(report.ok());
  }
}

TEST_CASE("selection trace shrinks by one and never picks zero weight") {
  const ClaimProfile profile({0.4, 0.0, 0.3, 0.2, 0.1});
  RandomSource rng(5);
  const auto sel = bf_lottery(profile, 4, rng, {.record_trace = true});
  REQUIRE(sel.trace.rounds.size() == 4);
  for (std::size_t t = 0; t < sel.trace.rounds.size(); ++t) {
    const auto& round = sel.trace.rounds[t];
    CHECK(round.weights.round() == t + 1);
    CHECK(round.weights.survivors().size() == profile.size() - t);
    const auto survivors = round.weights.survivors();
    const auto it = std::find(survivors.begin(), survivors.end(), round.chosen);
    REQUIRE(it != survivors.end());
    CHECK(round.weights.weights()[static_cast<std::size_t>(it - survivors.begin())] > 0.0);
  }
  // The zero claim is left for last.
  CHECK(sel.result.outcomes[1] == 0);
  CHECK_FALSE(sel.trace.zero_claim_fallback);
}

TEST_CASE("zero claims fall back to a uniform draw once positives run out") {
  const ClaimProfile profile({0.9, 0.0, 0.0});
  const std::size_t draws = 20000;
  std::vector<double> freq(3, 0.0);
  for (std::size_t d = 0; d < draws; ++d) {
    RandomSource rng(3, d);
    const auto sel = bf_lottery(profile, 2, rng);
    CHECK(sel.result.outcomes[0] == 1);
    CHECK(sel.result.mechanism == "bf+zero_claim_fallback");
    for (std::size_t i = 0; i < 3; ++i) freq[i] += sel.result.outcomes[i];
  }
  CHECK(std::abs(freq[1] / draws - 0.5) < 3 * oracle::binomial_sigma(0.5, draws));

  RandomSource rng(1);
  CHECK_THROWS_AS(bf_lottery(profile, 2, rng, {.zero_claim_fallback = false}),
                  ConfigError);
  CHECK_THROWS_AS(iterative_weighted_selection(profile, 2, bf_weights, rng,
                                               {.zero_claim_fallback = false}),
                  ConfigError);
}

TEST_CASE("reference selection and the sum-tree path draw the same sequence") {
  RandomSource gen(99);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + gen.below(20);
    const auto profile = random_profile(gen, n);
    const std::size_t k = 1 + gen.below(n);
    RandomSource a(rep, 1);
    RandomSource b(rep, 1);
    const auto fast = bf_lottery(profile, k, a).result;
    const auto slow = iterative_weighted_selection(profile, k, bf_weights, b).result;
    CHECK(fast.selected_order == slow.selected_order);
  }
}

TEST_CASE("BF inclusion is monotone in claim strength") {
  RandomSource gen(4);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> claims(n);
      for (auto& c : claims) c = std::round(gen.uniform() * 10.0) / 10.0;
      for (std::size_t k = 1; k <= n; ++k) {
        const auto p = oracle::inclusion_probabilities(claims, k);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            if (claims[i] > claims[j]) CHECK(p[i] >= p[j] - 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("partial lottery never drops the top k - k' claims") {
  RandomSource gen(12);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 4 + gen.below(40);
    const auto profile = random_profile(gen, n);
    const std::size_t k = 2 + gen.below(n - 2);
    const std::size_t kp = 1 + gen.below(k - 1);
    const std::size_t np = kp + 1 + gen.below(n - k);
    RandomSource rng(rep);
    const LotteryConfig cfg{.k = k, .n = n, .k_prime = kp, .n_prime = np,
                            .mechanism = Mechanism::kPartialBF};
    const auto sel = partial_bf_lottery(profile, cfg, rng);
    const auto top = canonical_sort(profile);
    for (std::size_t r = 0; r < k - kp; ++r) {
      CHECK(sel.result.outcomes[top[r]] == 1);
    }
    CHECK_NOTHROW(sel.result.validate(k));
  }
}

TEST_CASE("halving every claim leaves BF draws unchanged") {
  // Scaling by a power of two is exact, so the draws must match bit for bit;
  // arbitrary positive factors are covered by the ratio form of the weights.
  RandomSource gen(17);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + gen.below(25);
    const auto profile = random_profile(gen, n);
    std::vector<double> halved(profile.claims().begin(), profile.claims().end());
    for (auto& c : halved) c *= 0.5;
    const std::size_t k = 1 + gen.below(n);
    RandomSource a(rep);
    RandomSource b(rep);
    CHECK(bf_lottery(profile, k, a).result.selected_order ==
          bf_lottery(profile.with_claims(halved), k, b).result.selected_order);

    std::vector<double> scaled(profile.claims().begin(), profile.claims().end());
    for (auto& c : scaled) c *= 0.37;
    if (n <= 6) {
      const auto p = oracle::inclusion_probabilities(
          std::vector<double>(profile.claims().begin(), profile.claims().end()), k);
      const auto q = oracle::inclusion_probabilities(scaled, k);
      for (std::size_t i = 0; i < n; ++i) CHECK(p[i] == doctest::Approx(q[i]));
    }
  }
}

TEST_CASE("every mechanism allocates exactly k with binary outcomes") {
  RandomSource gen(30);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 3 + gen.below(30);
    const auto profile = random_profile(gen, n);
    const std::size_t k = 2 + gen.below(n - 2);
    for (auto mech : {Mechanism::kTopK, Mechanism::kUnweighted, Mechanism::kBF,
                      Mechanism::kPartialBF}) {
      LotteryConfig cfg{.k = k, .n = n, .k_prime = 1, .n_prime = 2,
                        .mechanism = mech};
      RandomSource rng(rep);
      const auto sel = allocate(profile, cfg, rng);
      CHECK_NOTHROW(sel.result.validate(k));
    }
  }
  RandomSource rng(1);
  CHECK_THROWS_AS(allocate(ClaimProfile({0.5, 0.2}),
                           {.k = 1, .n = 2, .mechanism = Mechanism::kVariance},
                           rng),
                  ConfigError);
}

TEST_CASE("equal seeds give bit-identical allocations") {
  RandomSource gen(2);
  const auto profile = random_profile(gen, 100);
  RandomSource a(555, 3);
  RandomSource b(555, 3);
  const auto x = bf_lottery(profile, 25, a).result;
  const auto y = bf_lottery(profile, 25, b).result;
  CHECK(x.outcomes == y.outcomes);
  CHECK(x.selected_order == y.selected_order);
  CHECK(x.seed == y.seed);
}

}  // namespace
}  // namespace randalloc::lottery

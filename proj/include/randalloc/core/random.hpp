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

// Deterministic, splittable random streams.
//
// Every random decision in the library is drawn from a RandomSource
// identified by (seed, stream_id). The generator is counter based: the i-th
// output of a stream is a SplitMix64 finalizer applied to key + i * golden,
// where the key is a hash of (seed, stream_id). Nothing here touches the
// standard <random> distributions, whose output is implementation defined,
// so draw sequences are identical across compilers and platforms.
//
// Bump kGeneratorVersion whenever the output of any member changes.

#ifndef RANDALLOC_CORE_RANDOM_HPP_
#define RANDALLOC_CORE_RANDOM_HPP_

#include <cstdint>
#include <limits>
#include <string_view>

namespace randalloc {

inline constexpr std::string_view kGeneratorVersion = "splitmix64-ctr/1";

// SplitMix64 output mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Order-sensitive combination of two 64-bit values.
constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (mix64(b + 0x9e3779b97f4a7c15ULL) + 0x632be59bd9b4e019ULL));
}

class RandomSource {
 public:
  using result_type = std::uint64_t;

  explicit RandomSource(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed),
        stream_id_(stream_id),
        key_(hash_combine(mix64(seed), stream_id)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  // Number of 64-bit words consumed so far.
  std::uint64_t position() const { return counter_; }

  // Child stream, independent of this one and of its siblings. Does not
  // advance this stream.
  RandomSource derive(std::uint64_t sub_stream) const {
    return RandomSource(seed_, hash_combine(stream_id_, sub_stream));
  }

  std::uint64_t next() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1).
  double uniform_open() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal via Box-Muller; consumes exactly two words.
  double normal();

  // UniformRandomBitGenerator interface.
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return next(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace randalloc

#endif  // RANDALLOC_CORE_RANDOM_HPP_

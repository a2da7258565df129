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

#ifndef RANDALLOC_LOTTERY_SUM_TREE_HPP_
#define RANDALLOC_LOTTERY_SUM_TREE_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace randalloc::lottery {

// Complete binary tree of partial sums over non-negative weights.
//
// Internal nodes are recomputed from their children on every update rather
// than adjusted by differences, so a removed leaf contributes exactly zero
// and no drift accumulates over many removals.
class SumTree {
 public:
  explicit SumTree(std::span<const double> weights);

  std::size_t size() const { return size_; }
  double total() const { return nodes_[1]; }
  double weight(std::size_t i) const { return nodes_[leaves_ + i]; }

  void set(std::size_t i, double weight);

  // Smallest index whose inclusive prefix sum exceeds `target`; this is the
  // inverse-CDF lookup a linear cumulative scan performs. Never returns a
  // zero-weight leaf. Requires total() > 0 and target >= 0.
  std::size_t find(double target) const;

 private:
  std::size_t size_;
  std::size_t leaves_;
  std::vector<double> nodes_;
};

}  // namespace randalloc::lottery

#endif  // RANDALLOC_LOTTERY_SUM_TREE_HPP_

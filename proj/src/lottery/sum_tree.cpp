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

#include "randalloc/lottery/sum_tree.hpp"

#include <algorithm>
#include <bit>

namespace randalloc::lottery {

SumTree::SumTree(std::span<const double> weights)
    : size_(weights.size()),
      leaves_(std::bit_ceil(std::max<std::size_t>(weights.size(), 1))),
      nodes_(2 * leaves_, 0.0) {
  for (std::size_t i = 0; i < size_; ++i) nodes_[leaves_ + i] = weights[i];
  for (std::size_t node = leaves_ - 1; node >= 1; --node) {
    nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
  }
}

void SumTree::set(std::size_t i, double weight) {
  std::size_t node = leaves_ + i;
  nodes_[node] = weight;
  for (node /= 2; node >= 1; node /= 2) {
    nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
  }
}

std::size_t SumTree::find(double target) const {
  std::size_t node = 1;
  while (node < leaves_) {
    const double left = nodes_[2 * node];
    const double right = nodes_[2 * node + 1];
    // Rounding can leave `target` at or past the subtree total; the right
    // branch is only taken when it holds mass.
    if (target < left || !(right > 0.0)) {
      node = 2 * node;
    } else {
      target -= left;
      node = 2 * node + 1;
    }
  }
  return node - leaves_;
}

}  // namespace randalloc::lottery

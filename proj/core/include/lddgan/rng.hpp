// Copyright 2026 The LDDGAN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "lddgan/tensor.hpp"

namespace lddgan {

// Counter-based random stream (Philox4x32-10). The stream position is a plain
// block counter, so any draw can be reproduced from (seed, counter) alone.
// Sub-streams are derived by hashing a label into the key.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  RngStream derive(std::string_view label) const;
  RngStream derive(std::string_view label, std::uint64_t index) const;

  // One 128-bit block; advances the counter by one.
  std::array<std::uint32_t, 4> next_block();

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n);
  // Standard normal pair via Box-Muller on one block.
  std::array<double, 2> normal_pair();

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

// i.i.d. N(0, 1) entries; consumes ceil(numel / 2) blocks.
Tensor gaussian_sample(RngStream& stream, const Shape& shape);
Tensor uniform_sample(RngStream& stream, const Shape& shape, double lo, double hi);

// Uniformly random permutation of 0..n-1 (Fisher-Yates).
std::vector<std::size_t> permutation(std::size_t n, RngStream& stream);

}  // namespace lddgan

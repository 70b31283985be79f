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

#include "lddgan/rng.hpp"

#include <cmath>
#include <numbers>

#include "lddgan/error.hpp"

namespace lddgan {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

RngStream RngStream::derive(std::string_view label) const {
  return RngStream(splitmix64(seed_ ^ splitmix64(fnv1a(label))));
}

RngStream RngStream::derive(std::string_view label, std::uint64_t index) const {
  return RngStream(splitmix64(derive(label).seed() + splitmix64(index)));
}

std::array<std::uint32_t, 4> RngStream::next_block() {
  const std::uint64_t c = counter_++;
  return philox4x32_10({static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32), 0u, 0u},
                       {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
}

std::uint64_t RngStream::next_u64() {
  const auto b = next_block();
  return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
}

double RngStream::uniform() { return to_unit(next_u64()); }

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
  if (n == 0) throw ConfigError("uniform_int: empty range");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    const std::uint64_t v = next_u64();
    if (v < limit) return v % n;
  }
}

std::array<double, 2> RngStream::normal_pair() {
  const auto b = next_block();
  const std::uint64_t a = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
  const std::uint64_t c = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
  // u1 in (0, 1] so the log is finite.
  const double u1 = 1.0 - to_unit(a);
  const double u2 = to_unit(c);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

Tensor gaussian_sample(RngStream& stream, const Shape& shape) {
  check_shape(shape);
  Tensor out(shape);
  auto d = out.data();
  std::size_t i = 0;
  for (; i + 1 < d.size(); i += 2) {
    const auto p = stream.normal_pair();
    d[i] = p[0];
    d[i + 1] = p[1];
  }
  if (i < d.size()) d[i] = stream.normal_pair()[0];
  return out;
}

Tensor uniform_sample(RngStream& stream, const Shape& shape, double lo, double hi) {
  check_shape(shape);
  Tensor out(shape);
  for (double& v : out.data()) v = lo + (hi - lo) * stream.uniform();
  return out;
}

std::vector<std::size_t> permutation(std::size_t n, RngStream& stream) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[stream.uniform_int(i)]);
  return order;
}

}  // namespace lddgan

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

#include <span>
#include <string>

#include "lddgan/autograd.hpp"
#include "lddgan/params.hpp"
#include "lddgan/rng.hpp"

namespace lddgan::nn {

// Fully connected layer acting on the last axis.
struct Dense {
  Var weight;  // [in, out]
  Var bias;    // [out], undefined when created without bias
  std::size_t in = 0;
  std::size_t out = 0;

  // Uniform init with variance gain^2 / fan_in.
  static Dense create(ParamSet& params, const std::string& name, std::size_t in, std::size_t out,
                      RngStream& rng, double gain = 1.0, bool with_bias = true);
  Var operator()(const Var& x) const;
};

// NHWC convolution implemented as im2col + matmul. Weight layout
// [k*k*in, out] matches the im2col column order.
struct Conv2d {
  Var weight;
  Var bias;
  ConvGeometry geometry;
  std::size_t in = 0;
  std::size_t out = 0;

  static Conv2d create(ParamSet& params, const std::string& name, std::size_t in, std::size_t out,
                       std::size_t kernel, std::size_t stride, RngStream& rng, double gain = 1.0);
  Var operator()(const Var& x) const;
};

// min(8, channels); ConfigError when channels is not a multiple of it.
std::size_t default_groups(std::size_t channels);
void check_groups(std::size_t channels, std::size_t groups);

// Per-sample, per-group standardisation of [N, C] or [N, H, W, C].
Var group_normalize(const Var& h, std::size_t groups, double eps = 1e-5);

// Group norm with a learned per-channel affine.
struct GroupNorm {
  std::size_t groups = 1;
  Var gamma;
  Var beta;

  static GroupNorm create(ParamSet& params, const std::string& name, std::size_t channels);
  Var operator()(const Var& h) const;
};

// Group norm whose per-channel scale and shift are predicted from a
// conditioning embedding: out = normalize(h) * (1 + s(e)) + b(e).
struct AdaptiveGroupNorm {
  std::size_t groups = 1;
  std::size_t channels = 0;
  Dense head;  // e -> [s, b], 2 * channels outputs

  static AdaptiveGroupNorm create(ParamSet& params, const std::string& name, std::size_t channels,
                                  std::size_t embed_dim, RngStream& rng);
  Var operator()(const Var& h, const Var& embed) const;
};

// Reshapes a per-sample [N, C] tensor so it broadcasts against `like`.
Var per_sample(const Var& v, const Shape& like);

// [t.size(), dim] table of sin/cos features of the integer timesteps.
Tensor sinusoidal_embedding(std::span<const int> t, std::size_t dim);

// Appends one channel holding the batch-averaged standard deviation of the
// features. The channel is shifted so that a batch of identical samples
// yields exactly zero.
Var minibatch_stddev(const Var& h);

// z / sqrt(mean(z^2) + eps) per sample.
Var pixel_norm(const Var& z);

inline Var act(const Var& x) { return leaky_relu(x, 0.2); }

}  // namespace lddgan::nn

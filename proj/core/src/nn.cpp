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

#include "lddgan/nn.hpp"

#include <cmath>

#include "lddgan/error.hpp"

namespace lddgan::nn {
namespace {

Tensor uniform_init(RngStream& rng, Shape shape, std::size_t fan_in, double gain) {
  const double bound = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
  return uniform_sample(rng, shape, -bound, bound);
}

}  // namespace

Dense Dense::create(ParamSet& params, const std::string& name, std::size_t in, std::size_t out,
                    RngStream& rng, double gain, bool with_bias) {
  Dense d;
  d.in = in;
  d.out = out;
  d.weight = params.add(name + ".weight", uniform_init(rng, {in, out}, in, gain));
  if (with_bias) d.bias = params.add(name + ".bias", Tensor({out}));
  return d;
}

Var Dense::operator()(const Var& x) const {
  const Shape& s = x.shape();
  if (s.empty() || s.back() != in) {
    throw ShapeError("Dense expects last axis " + std::to_string(in) + ", got " + shape_str(s));
  }
  Var flat = s.size() == 2 ? x : reshape(x, {x.size() / in, in});
  Var y = matmul(flat, weight);
  if (bias.defined()) y = y + bias;
  if (s.size() == 2) return y;
  Shape os = s;
  os.back() = out;
  return reshape(y, os);
}

Conv2d Conv2d::create(ParamSet& params, const std::string& name, std::size_t in, std::size_t out,
                      std::size_t kernel, std::size_t stride, RngStream& rng, double gain) {
  Conv2d c;
  c.in = in;
  c.out = out;
  c.geometry = ConvGeometry{kernel, stride, kernel / 2};
  const std::size_t fan_in = kernel * kernel * in;
  c.weight = params.add(name + ".weight", uniform_init(rng, {fan_in, out}, fan_in, gain));
  c.bias = params.add(name + ".bias", Tensor({out}));
  return c;
}

Var Conv2d::operator()(const Var& x) const {
  const Shape& s = x.shape();
  if (s.size() != 4 || s[3] != in) {
    throw ShapeError("Conv2d expects NHWC with " + std::to_string(in) + " channels, got " + shape_str(s));
  }
  const auto& g = geometry;
  if (g.kernel == 1 && g.stride == 1) {
    Var y = matmul(reshape(x, {s[0] * s[1] * s[2], in}), weight) + bias;
    return reshape(y, {s[0], s[1], s[2], out});
  }
  const std::size_t ho = (s[1] + 2 * g.pad - g.kernel) / g.stride + 1;
  const std::size_t wo = (s[2] + 2 * g.pad - g.kernel) / g.stride + 1;
  Var y = matmul(im2col(x, g), weight) + bias;
  return reshape(y, {s[0], ho, wo, out});
}

std::size_t default_groups(std::size_t channels) {
  const std::size_t g = std::min<std::size_t>(8, channels);
  check_groups(channels, g);
  return g;
}

void check_groups(std::size_t channels, std::size_t groups) {
  if (groups == 0 || channels % groups != 0) {
    throw ConfigError("channel count " + std::to_string(channels) + " is not divisible by " +
                      std::to_string(groups) + " normalization groups");
  }
}

Var group_normalize(const Var& h, std::size_t groups, double eps) {
  const Shape& s = h.shape();
  if (s.size() < 2) throw ShapeError("group_normalize expects [N, ..., C], got " + shape_str(s));
  const std::size_t n = s[0];
  const std::size_t c = s.back();
  check_groups(c, groups);
  const std::size_t spatial = h.size() / (n * c);
  Var x = reshape(h, {n, spatial, groups, c / groups});
  Var mu = mean(x, {1, 3}, true);
  Var d = x - mu;
  Var var = mean(square(d), {1, 3}, true);
  return reshape(d * pow(var + eps, -0.5), s);
}

GroupNorm GroupNorm::create(ParamSet& params, const std::string& name, std::size_t channels) {
  GroupNorm g;
  g.groups = default_groups(channels);
  g.gamma = params.add(name + ".gamma", Tensor({channels}, 1.0));
  g.beta = params.add(name + ".beta", Tensor({channels}));
  return g;
}

Var GroupNorm::operator()(const Var& h) const { return group_normalize(h, groups) * gamma + beta; }

AdaptiveGroupNorm AdaptiveGroupNorm::create(ParamSet& params, const std::string& name,
                                            std::size_t channels, std::size_t embed_dim,
                                            RngStream& rng) {
  AdaptiveGroupNorm a;
  a.channels = channels;
  a.groups = default_groups(channels);
  a.head = Dense::create(params, name + ".style", embed_dim, 2 * channels, rng, 0.1);
  return a;
}

Var AdaptiveGroupNorm::operator()(const Var& h, const Var& embed) const {
  if (h.shape().back() != channels) {
    throw ShapeError("AdaptiveGroupNorm expects " + std::to_string(channels) + " channels, got " +
                     shape_str(h.shape()));
  }
  const Var style = head(embed);
  const Var scale = per_sample(slice_last(style, 0, channels), h.shape());
  const Var shift = per_sample(slice_last(style, channels, channels), h.shape());
  return group_normalize(h, groups) * (scale + 1.0) + shift;
}

Var per_sample(const Var& v, const Shape& like) {
  if (like.size() == 2) return v;
  Shape s(like.size(), 1);
  s.front() = v.shape().front();
  s.back() = v.shape().back();
  return reshape(v, s);
}

Tensor sinusoidal_embedding(std::span<const int> t, std::size_t dim) {
  if (dim < 2 || dim % 2) throw ConfigError("time embedding dimension must be even and >= 2");
  const std::size_t half = dim / 2;
  Tensor out({t.size(), dim});
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t k = 0; k < half; ++k) {
      const double freq = std::exp(-std::log(10000.0) * static_cast<double>(k) / static_cast<double>(half));
      const double arg = static_cast<double>(t[i]) * freq;
      out[i * dim + k] = std::sin(arg);
      out[i * dim + half + k] = std::cos(arg);
    }
  }
  return out;
}

Var minibatch_stddev(const Var& h) {
  constexpr double kEps = 1e-8;
  const Shape& s = h.shape();
  Var mu = mean(h, {0}, true);
  Var var = mean(square(h - mu), {0}, true);
  Var sd = sqrt(var + kEps) - std::sqrt(kEps);
  Var avg = mean_all(sd);
  Shape one(s.size(), 1);
  Shape feature_shape = s;
  feature_shape.back() = 1;
  Var feature = broadcast_to(reshape(avg, one), feature_shape);
  return concat_last({h, feature});
}

Var pixel_norm(const Var& z) {
  return z * pow(mean(square(z), {z.shape().size() - 1}, true) + 1e-8, -0.5);
}

}  // namespace lddgan::nn

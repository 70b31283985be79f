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

#include "lddgan/gan.hpp"

#include <cmath>

#include "lddgan/error.hpp"

namespace lddgan::gan {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

std::vector<int> expand_timesteps(std::span<const int> t, std::size_t n, int max_t) {
  if (t.size() != n && t.size() != 1) {
    throw ShapeError("expected " + std::to_string(n) + " timesteps, got " + std::to_string(t.size()));
  }
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = t.size() == 1 ? t[0] : t[i];
    if (out[i] < 1 || out[i] > max_t) {
      throw IndexError("timestep " + std::to_string(out[i]) + " outside [1, " + std::to_string(max_t) + "]");
    }
  }
  return out;
}

void check_common(std::size_t data_channels, std::size_t base, std::size_t temb, int max_t) {
  if (data_channels == 0 || base == 0) throw ConfigError("channel counts must be positive");
  if (temb < 2 || temb % 2) throw ConfigError("time_embed_dim must be even and >= 2");
  if (max_t < 1) throw ConfigError("max_timestep must be at least 1");
}

Var avgpool(const Var& x) { return sumpool2x(x) * 0.25; }

}  // namespace

NetMode parse_net_mode(const std::string& s) {
  if (s == "vector") return NetMode::kVector;
  if (s == "grid") return NetMode::kGrid;
  throw ConfigError("unknown network mode '" + s + "' (expected vector or grid)");
}

std::string to_string(NetMode mode) { return mode == NetMode::kVector ? "vector" : "grid"; }

void GeneratorConfig::validate() const {
  check_common(data_channels, base_channels, time_embed_dim, max_timestep);
  if (z_dim == 0 || z_embed_dim == 0) throw ConfigError("z_dim and z_embed_dim must be positive");
  if (mode == NetMode::kGrid && channel_multipliers.empty()) {
    throw ConfigError("channel_multipliers must not be empty");
  }
  for (std::size_t m : channel_multipliers) {
    if (m == 0) throw ConfigError("channel multipliers must be positive");
    if (mode == NetMode::kGrid) nn::default_groups(base_channels * m);
  }
  if (mode == NetMode::kVector) nn::default_groups(base_channels);
}

std::size_t GeneratorConfig::spatial_divisor() const {
  return mode == NetMode::kGrid ? std::size_t{1} << (channel_multipliers.size() - 1) : 1;
}

void DiscriminatorConfig::validate() const {
  check_common(data_channels, base_channels, time_embed_dim, max_timestep);
  if (mode == NetMode::kGrid && channel_multipliers.empty()) {
    throw ConfigError("channel_multipliers must not be empty");
  }
  for (std::size_t m : channel_multipliers) {
    if (m == 0) throw ConfigError("channel multipliers must be positive");
  }
  if (mode == NetMode::kVector && num_blocks == 0) throw ConfigError("num_blocks must be positive");
}

std::size_t DiscriminatorConfig::spatial_divisor() const {
  return mode == NetMode::kGrid ? std::size_t{1} << (channel_multipliers.size() - 1) : 1;
}

// ---------------------------------------------------------------------------
// Generator

Generator::ResBlock Generator::make_block(const std::string& name, std::size_t in, std::size_t out,
                                          RngStream& rng) {
  ResBlock b;
  b.norm1 = nn::AdaptiveGroupNorm::create(params_, name + ".norm1", in, config_.z_embed_dim, rng);
  b.time_proj = nn::Dense::create(params_, name + ".time", config_.time_embed_dim, out, rng);
  b.norm2 = nn::AdaptiveGroupNorm::create(params_, name + ".norm2", out, config_.z_embed_dim, rng);
  if (config_.mode == NetMode::kVector) {
    b.dense1 = nn::Dense::create(params_, name + ".dense1", in, out, rng, std::sqrt(2.0));
    b.dense2 = nn::Dense::create(params_, name + ".dense2", out, out, rng, 0.5);
  } else {
    b.conv1 = nn::Conv2d::create(params_, name + ".conv1", in, out, 3, 1, rng, std::sqrt(2.0));
    b.conv2 = nn::Conv2d::create(params_, name + ".conv2", out, out, 3, 1, rng, 0.5);
  }
  if (in != out) {
    if (config_.mode == NetMode::kVector) throw ConfigError("vector blocks must keep their width");
    b.has_skip = true;
    b.skip = nn::Conv2d::create(params_, name + ".skip", in, out, 1, 1, rng);
  }
  return b;
}

Var Generator::apply_block(const ResBlock& b, const Var& x, const Var& temb, const Var& zemb) const {
  Var h = nn::act(b.norm1(x, zemb));
  if (config_.mode == NetMode::kVector) {
    h = b.dense1(h) + b.time_proj(nn::act(temb));
    h = b.dense2(nn::act(b.norm2(h, zemb)));
    return x + h;
  }
  h = b.conv1(h);
  h = h + nn::per_sample(b.time_proj(nn::act(temb)), h.shape());
  h = b.conv2(nn::act(b.norm2(h, zemb)));
  Var skip = b.has_skip ? b.skip(x) : x;
  return (skip + h) * kInvSqrt2;
}

Generator::Generator(const GeneratorConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  RngStream rng = RngStream(seed).derive("generator-init");
  const std::size_t e = config_.z_embed_dim;
  std::size_t zin = config_.z_dim;
  for (std::size_t i = 0; i < config_.z_mapping_layers; ++i) {
    mapping_.push_back(nn::Dense::create(params_, "mapping." + std::to_string(i), zin, e, rng, std::sqrt(2.0)));
    zin = e;
  }
  if (config_.z_mapping_layers == 0 && config_.z_dim != e) {
    throw ConfigError("z_embed_dim must equal z_dim when there are no mapping layers");
  }
  const std::size_t te = config_.time_embed_dim;
  time1_ = nn::Dense::create(params_, "time.dense1", te, te, rng, std::sqrt(2.0));
  time2_ = nn::Dense::create(params_, "time.dense2", te, te, rng);

  const std::size_t base = config_.base_channels;
  const std::size_t c = config_.data_channels;
  if (config_.mode == NetMode::kVector) {
    in_dense_ = nn::Dense::create(params_, "input", c, base, rng);
    for (std::size_t i = 0; i < config_.num_res_blocks; ++i) {
      vector_blocks_.push_back(make_block("block." + std::to_string(i), base, base, rng));
    }
    out_norm_ = nn::AdaptiveGroupNorm::create(params_, "output.norm", base, e, rng);
    out_dense_ = nn::Dense::create(params_, "output", base, c, rng);
    return;
  }

  in_conv_ = nn::Conv2d::create(params_, "input", c, base, 3, 1, rng);
  const auto& mult = config_.channel_multipliers;
  std::vector<std::size_t> skip_channels{base};
  std::size_t ch = base;
  for (std::size_t l = 0; l < mult.size(); ++l) {
    std::vector<ResBlock> level;
    for (std::size_t r = 0; r < config_.num_res_blocks; ++r) {
      const std::size_t out = base * mult[l];
      level.push_back(make_block("down." + std::to_string(l) + "." + std::to_string(r), ch, out, rng));
      ch = out;
      skip_channels.push_back(ch);
    }
    if (l + 1 < mult.size()) skip_channels.push_back(ch);
    down_.push_back(std::move(level));
  }
  mid_.push_back(make_block("mid.0", ch, ch, rng));
  mid_.push_back(make_block("mid.1", ch, ch, rng));
  for (std::size_t li = mult.size(); li-- > 0;) {
    std::vector<ResBlock> level;
    for (std::size_t r = 0; r <= config_.num_res_blocks; ++r) {
      const std::size_t skip = skip_channels.back();
      skip_channels.pop_back();
      const std::size_t out = base * mult[li];
      level.push_back(make_block("up." + std::to_string(li) + "." + std::to_string(r), ch + skip, out, rng));
      ch = out;
    }
    up_.push_back(std::move(level));
    if (li > 0) up_convs_.push_back(nn::Conv2d::create(params_, "upsample." + std::to_string(li), ch, ch, 3, 1, rng));
  }
  out_norm_ = nn::AdaptiveGroupNorm::create(params_, "output.norm", ch, e, rng);
  out_conv_ = nn::Conv2d::create(params_, "output", ch, c, 3, 1, rng, 0.5);
}

Var Generator::map_latent(const Var& z) const {
  if (z.shape().size() != 2 || z.shape()[1] != config_.z_dim) {
    throw ShapeError("z must be [N, " + std::to_string(config_.z_dim) + "], got " + shape_str(z.shape()));
  }
  Var h = nn::pixel_norm(z);
  for (const auto& layer : mapping_) h = nn::act(layer(h));
  return h;
}

Var Generator::time_embedding(std::span<const int> t, std::size_t n) const {
  const auto steps = expand_timesteps(t, n, config_.max_timestep);
  const Var table = constant(nn::sinusoidal_embedding(steps, config_.time_embed_dim));
  return time2_(nn::act(time1_(table)));
}

void Generator::check_inputs(const Var& x_t, const Var& z, std::span<const int> t) const {
  const Shape& s = x_t.shape();
  if (config_.mode == NetMode::kVector) {
    if (s.size() != 2 || s[1] != config_.data_channels) {
      throw ShapeError("generator expects x_t of shape [N, " + std::to_string(config_.data_channels) +
                       "], got " + shape_str(s));
    }
  } else {
    const std::size_t div = config_.spatial_divisor();
    if (s.size() != 4 || s[3] != config_.data_channels || s[1] % div || s[2] % div) {
      throw ShapeError("generator expects x_t of shape [N, H, W, " + std::to_string(config_.data_channels) +
                       "] with H, W divisible by " + std::to_string(div) + ", got " + shape_str(s));
    }
  }
  if (z.shape().size() != 2 || z.shape()[0] != s[0]) {
    throw ShapeError("z batch does not match x_t batch");
  }
  (void)t;
}

Var Generator::forward(const Var& x_t, const Var& z, std::span<const int> t) const {
  check_inputs(x_t, z, t);
  const std::size_t n = x_t.shape()[0];
  const Var zemb = map_latent(z);
  const Var temb = time_embedding(t, n);

  if (config_.mode == NetMode::kVector) {
    Var h = in_dense_(x_t);
    for (const auto& b : vector_blocks_) h = apply_block(b, h, temb, zemb);
    return out_dense_(nn::act(out_norm_(h, zemb)));
  }

  Var h = in_conv_(x_t);
  std::vector<Var> skips{h};
  for (std::size_t l = 0; l < down_.size(); ++l) {
    for (const auto& b : down_[l]) {
      h = apply_block(b, h, temb, zemb);
      skips.push_back(h);
    }
    if (l + 1 < down_.size()) {
      h = avgpool(h);
      skips.push_back(h);
    }
  }
  for (const auto& b : mid_) h = apply_block(b, h, temb, zemb);
  for (std::size_t u = 0; u < up_.size(); ++u) {
    for (const auto& b : up_[u]) {
      const Var skip = skips.back();
      skips.pop_back();
      h = apply_block(b, concat_last({h, skip}), temb, zemb);
    }
    if (u < up_convs_.size()) h = up_convs_[u](upsample2x(h));
  }
  return out_conv_(nn::act(out_norm_(h, zemb)));
}

// ---------------------------------------------------------------------------
// Discriminator

Discriminator::Discriminator(const DiscriminatorConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  RngStream rng = RngStream(seed).derive("discriminator-init");
  const std::size_t te = config_.time_embed_dim;
  time1_ = nn::Dense::create(params_, "time.dense1", te, te, rng, std::sqrt(2.0));
  time2_ = nn::Dense::create(params_, "time.dense2", te, te, rng);
  const std::size_t base = config_.base_channels;
  const std::size_t c2 = 2 * config_.data_channels;

  if (config_.mode == NetMode::kVector) {
    in_dense_ = nn::Dense::create(params_, "input", c2, base, rng, std::sqrt(2.0));
    for (std::size_t i = 0; i < config_.num_blocks; ++i) {
      Block b;
      const std::string name = "block." + std::to_string(i);
      b.dense1 = nn::Dense::create(params_, name + ".dense1", base, base, rng, std::sqrt(2.0));
      b.time_proj = nn::Dense::create(params_, name + ".time", te, base, rng);
      b.dense2 = nn::Dense::create(params_, name + ".dense2", base, base, rng, 0.5);
      blocks_.push_back(b);
    }
    post_dense_ = nn::Dense::create(params_, "post", base + 1, base, rng, std::sqrt(2.0));
    out_dense_ = nn::Dense::create(params_, "output", base, 1, rng);
    return;
  }

  const auto& mult = config_.channel_multipliers;
  std::size_t ch = base * mult[0];
  in_conv_ = nn::Conv2d::create(params_, "input", c2, ch, 1, 1, rng);
  for (std::size_t l = 0; l < mult.size(); ++l) {
    Block b;
    const std::string name = "block." + std::to_string(l);
    const std::size_t out = base * mult[l];
    b.down = l > 0;
    b.conv1 = nn::Conv2d::create(params_, name + ".conv1", ch, out, 3, 1, rng, std::sqrt(2.0));
    b.time_proj = nn::Dense::create(params_, name + ".time", te, out, rng);
    b.conv2 = nn::Conv2d::create(params_, name + ".conv2", out, out, 3, 1, rng, 0.5);
    if (ch != out) {
      b.has_skip = true;
      b.skip = nn::Conv2d::create(params_, name + ".skip", ch, out, 1, 1, rng);
    }
    blocks_.push_back(b);
    ch = out;
  }
  post_conv_ = nn::Conv2d::create(params_, "post", ch + 1, ch, 3, 1, rng, std::sqrt(2.0));
  out_dense_ = nn::Dense::create(params_, "output", ch, 1, rng);
}

Var Discriminator::time_embedding(std::span<const int> t, std::size_t n) const {
  const auto steps = expand_timesteps(t, n, config_.max_timestep);
  const Var table = constant(nn::sinusoidal_embedding(steps, config_.time_embed_dim));
  return time2_(nn::act(time1_(table)));
}

Var Discriminator::forward(const Var& x_prev, const Var& x_t, std::span<const int> t) const {
  const Shape& s = x_t.shape();
  if (x_prev.shape() != s) {
    throw ShapeError("discriminator pair shapes differ: " + shape_str(x_prev.shape()) + " vs " + shape_str(s));
  }
  const std::size_t n = s.at(0);
  if (config_.mode == NetMode::kVector) {
    if (s.size() != 2 || s[1] != config_.data_channels) {
      throw ShapeError("discriminator expects [N, " + std::to_string(config_.data_channels) + "], got " +
                       shape_str(s));
    }
  } else {
    const std::size_t div = config_.spatial_divisor();
    if (s.size() != 4 || s[3] != config_.data_channels || s[1] % div || s[2] % div) {
      throw ShapeError("discriminator expects [N, H, W, " + std::to_string(config_.data_channels) +
                       "] with H, W divisible by " + std::to_string(div) + ", got " + shape_str(s));
    }
  }
  const Var temb = nn::act(time_embedding(t, n));
  Var h = concat_last({x_prev, x_t});

  if (config_.mode == NetMode::kVector) {
    h = nn::act(in_dense_(h));
    for (const auto& b : blocks_) {
      Var r = nn::act(b.dense1(h) + b.time_proj(temb));
      h = h + b.dense2(r);
    }
    h = nn::act(post_dense_(nn::minibatch_stddev(h)));
    return out_dense_(h);
  }

  h = in_conv_(h);
  for (const auto& b : blocks_) {
    Var r = b.conv1(nn::act(h));
    r = r + nn::per_sample(b.time_proj(temb), r.shape());
    r = b.conv2(nn::act(r));
    Var skip = h;
    if (b.down) {
      r = avgpool(r);
      skip = avgpool(skip);
    }
    if (b.has_skip) skip = b.skip(skip);
    h = (skip + r) * kInvSqrt2;
  }
  h = nn::act(post_conv_(nn::minibatch_stddev(h)));
  h = sum(h, {1, 2});
  return out_dense_(h);
}

}  // namespace lddgan::gan

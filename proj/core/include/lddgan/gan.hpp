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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lddgan/nn.hpp"
#include "lddgan/params.hpp"

namespace lddgan::gan {

// kVector: fully connected networks over [N, D] points.
// kGrid: convolutional networks over [N, H, W, C] latents.
enum class NetMode { kVector, kGrid };
NetMode parse_net_mode(const std::string& s);
std::string to_string(NetMode mode);

struct GeneratorConfig {
  NetMode mode = NetMode::kGrid;
  std::size_t data_channels = 4;  // latent channels, or point dimension in vector mode
  std::size_t base_channels = 128;  // grid base width, or hidden width in vector mode
  std::vector<std::size_t> channel_multipliers{1, 2, 2};
  std::size_t num_res_blocks = 2;
  std::size_t z_dim = 25;
  std::size_t z_mapping_layers = 4;
  std::size_t z_embed_dim = 256;
  std::size_t time_embed_dim = 128;
  int max_timestep = 4;  // largest t the network is conditioned on
  bool attention = false;  // accepted for config compatibility; no attention layers are built

  void validate() const;
  // Required divisor of the latent height and width in grid mode.
  std::size_t spatial_divisor() const;
};

struct DiscriminatorConfig {
  NetMode mode = NetMode::kGrid;
  std::size_t data_channels = 4;
  std::size_t base_channels = 128;
  // One residual block per entry; every block after the first downsamples.
  std::vector<std::size_t> channel_multipliers{1, 2, 4, 4};
  std::size_t num_blocks = 3;  // vector mode depth
  std::size_t time_embed_dim = 128;
  int max_timestep = 4;

  void validate() const;
  std::size_t spatial_divisor() const;
};

// G(x_t, z, t) -> x0 prediction, same shape as x_t.
class Generator {
 public:
  Generator(const GeneratorConfig& config, std::uint64_t seed);
  // Copies would alias the parameter nodes.
  Generator(const Generator&) = delete;
  Generator& operator=(const Generator&) = delete;
  Generator(Generator&&) = default;
  Generator& operator=(Generator&&) = default;

  Var forward(const Var& x_t, const Var& z, std::span<const int> t) const;
  Var map_latent(const Var& z) const;

  const GeneratorConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  struct ResBlock {
    nn::AdaptiveGroupNorm norm1, norm2;
    nn::Dense dense1, dense2;  // vector mode
    nn::Conv2d conv1, conv2, skip;  // grid mode
    nn::Dense time_proj;
    bool has_skip = false;
  };

  ResBlock make_block(const std::string& name, std::size_t in, std::size_t out, RngStream& rng);
  Var apply_block(const ResBlock& b, const Var& x, const Var& temb, const Var& zemb) const;
  Var time_embedding(std::span<const int> t, std::size_t n) const;
  void check_inputs(const Var& x_t, const Var& z, std::span<const int> t) const;

  GeneratorConfig config_;
  ParamSet params_;
  std::vector<nn::Dense> mapping_;
  nn::Dense time1_, time2_;
  // vector mode
  nn::Dense in_dense_, out_dense_;
  // grid mode
  nn::Conv2d in_conv_, out_conv_;
  std::vector<std::vector<ResBlock>> down_;
  std::vector<ResBlock> mid_;
  std::vector<std::vector<ResBlock>> up_;
  std::vector<nn::Conv2d> up_convs_;
  std::vector<ResBlock> vector_blocks_;
  nn::AdaptiveGroupNorm out_norm_;
};

// D(x_prev, x_t, t) -> one logit per batch item, shape [N, 1].
class Discriminator {
 public:
  Discriminator(const DiscriminatorConfig& config, std::uint64_t seed);
  Discriminator(const Discriminator&) = delete;
  Discriminator& operator=(const Discriminator&) = delete;
  Discriminator(Discriminator&&) = default;
  Discriminator& operator=(Discriminator&&) = default;

  Var forward(const Var& x_prev, const Var& x_t, std::span<const int> t) const;

  const DiscriminatorConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  struct Block {
    nn::Dense dense1, dense2, time_proj;
    nn::Conv2d conv1, conv2, skip;
    bool has_skip = false;
    bool down = false;
  };

  Var time_embedding(std::span<const int> t, std::size_t n) const;

  DiscriminatorConfig config_;
  ParamSet params_;
  nn::Dense time1_, time2_;
  nn::Dense in_dense_, post_dense_, out_dense_;
  nn::Conv2d in_conv_, post_conv_;
  std::vector<Block> blocks_;
};

}  // namespace lddgan::gan

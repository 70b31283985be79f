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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lddgan/checkpoint.hpp"
#include "lddgan/nn.hpp"
#include "lddgan/optim.hpp"
#include "lddgan/params.hpp"
#include "lddgan/rng.hpp"

namespace lddgan::ae {

struct AutoencoderConfig {
  std::size_t f = 2;  // downsample factor: 2, 4 or 8
  std::size_t image_channels = 1;
  std::size_t latent_channels = 4;
  std::size_t base_channels = 16;
  bool use_kl_penalty = false;
  double kl_weight = 1e-2;
  bool use_patch_adversarial = false;
  double patch_weight = 0.1;
  double lr = 2e-3;

  void validate() const;
  std::size_t levels() const;
  // Throws ConfigError unless H and W are divisible by f.
  Shape latent_shape(const Shape& image_shape) const;
};

struct LatentDistribution {
  Var mu;
  Var logvar;
};

class Autoencoder {
 public:
  Autoencoder(const AutoencoderConfig& config, std::uint64_t seed);
  Autoencoder(const Autoencoder&) = delete;
  Autoencoder& operator=(const Autoencoder&) = delete;
  Autoencoder(Autoencoder&&) = default;
  Autoencoder& operator=(Autoencoder&&) = default;

  // [N, H, W, C] -> [N, H/f, W/f, latent_channels]. Deterministic: with the KL
  // penalty enabled this is the mean of the latent distribution.
  Var encode(const Var& images) const;
  // KL mode only.
  LatentDistribution encode_distribution(const Var& images) const;
  // Latent -> images in [-1, 1].
  Var decode(const Var& latent) const;
  // Patch logits, one per output cell.
  Var critic(const Var& images) const;

  const AutoencoderConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  ParamSet& critic_params() { return critic_params_; }
  const ParamSet& critic_params() const { return critic_params_; }

  // Multiplier applied to encoder output before diffusion.
  double latent_scale() const { return latent_scale_; }
  void set_latent_scale(double s) { latent_scale_ = s; }

 private:
  struct ResBlock {
    nn::GroupNorm norm1, norm2;
    nn::Conv2d conv1, conv2, skip;
    bool has_skip = false;
  };
  ResBlock make_block(const std::string& name, std::size_t in, std::size_t out, RngStream& rng);
  static Var apply_block(const ResBlock& b, const Var& x);
  Var encode_raw(const Var& images) const;
  void check_image(const Shape& s) const;

  AutoencoderConfig config_;
  ParamSet params_;
  ParamSet critic_params_;
  double latent_scale_ = 1.0;

  nn::Conv2d enc_in_;
  std::vector<ResBlock> enc_blocks_;
  std::vector<nn::Conv2d> enc_down_;
  ResBlock enc_mid_;
  nn::GroupNorm enc_norm_;
  nn::Conv2d enc_out_;

  nn::Conv2d dec_in_;
  ResBlock dec_mid_;
  std::vector<nn::Conv2d> dec_up_;
  std::vector<ResBlock> dec_blocks_;
  nn::GroupNorm dec_norm_;
  nn::Conv2d dec_out_;

  std::vector<nn::Conv2d> critic_layers_;
};

// Mean over elements of 0.5 * (mu^2 + exp(logvar) - 1 - logvar).
Var kl_penalty(const Var& mu, const Var& logvar);

struct AeTrainState {
  OptimizerState opt;
  std::optional<OptimizerState> critic_opt;
  std::uint64_t step = 0;
};

AeTrainState make_ae_train_state(const Autoencoder& ae);

struct AeLossBreakdown {
  double l1 = 0.0;
  double kl = 0.0;
  double patch_g = 0.0;
  double patch_d = 0.0;
  double total = 0.0;
};

// One optimizer step on pixel L1 plus the enabled KL and patch terms. Throws
// NumericError on a non-finite loss before any parameter is touched.
AeLossBreakdown ae_train_step(const Tensor& batch, Autoencoder& ae, AeTrainState& state, const RngStream& rng);

struct AeEpochStats {
  int epoch = 0;  // 1-based count of completed epochs
  AeLossBreakdown mean;
  double mse = 0.0;  // deterministic-path reconstruction error after the epoch
};

// Shuffled minibatch epochs. `on_epoch` returning false stops early.
AeTrainState train_autoencoder(Autoencoder& ae, const Tensor& images, int epochs, std::size_t batch_size,
                               std::uint64_t seed, const std::function<bool(const AeEpochStats&)>& on_epoch = {});

// Autoencoder and patch critic parameters plus the latent scale.
io::TensorArchive to_archive(const Autoencoder& ae);
// Throws ShapeError naming the tensor on a configuration mismatch.
void from_archive(const io::TensorArchive& archive, Autoencoder& ae);

// Per-pixel mean squared reconstruction error through the deterministic path.
double reconstruction_mse(const Autoencoder& ae, const Tensor& images, std::size_t batch_size = 16);

// Sets the latent scale so encoded latents have unit per-element standard
// deviation over `images`. Returns the scale.
double fit_latent_scale(Autoencoder& ae, const Tensor& images, std::size_t batch_size = 16);

// Scaled latents for a whole image set, computed without recording a graph.
Tensor encode_dataset(const Autoencoder& ae, const Tensor& images, std::size_t batch_size = 16);
// Inverse of the scaling followed by decode.
Tensor decode_latents(const Autoencoder& ae, const Tensor& latents, std::size_t batch_size = 16);

}  // namespace lddgan::ae

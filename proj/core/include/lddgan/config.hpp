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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lddgan/autoencoder.hpp"
#include "lddgan/sampler.hpp"
#include "lddgan/training.hpp"

namespace lddgan::config {

enum class DatasetKind { kGaussians25, kToyImages, kImageDir, kTensorFile };
DatasetKind parse_dataset_kind(const std::string& s);
std::string to_string(DatasetKind kind);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kGaussians25;
  std::string path;            // image_dir / tensor_file
  std::size_t count = 2048;    // synthetic kinds
  std::uint64_t seed = 7;      // synthetic kinds
  std::size_t image_size = 16; // toy_images
  std::size_t holdout = 10000; // held-out real samples for evaluation (gaussians25)

  bool is_image() const { return kind == DatasetKind::kToyImages || kind == DatasetKind::kImageDir; }
};

struct AutoencoderSection {
  ae::AutoencoderConfig model;
  int epochs = 300;
  std::size_t batch_size = 8;
  std::string checkpoint;  // used by train/sample; empty = <out_dir>/autoencoder.lddg
};

struct SamplingSection {
  std::size_t count = 10000;
  bool use_ema = true;
  bool decode = true;
  int T = 0;  // 0 = training schedule
  std::size_t batch_size = 1024;
};

struct RunConfig {
  DatasetSpec dataset;
  int T = 4;
  double beta_min = 0.1;
  double beta_max = 0.0;
  diffusion::ScheduleKind schedule_kind = diffusion::ScheduleKind::kLinear;
  AutoencoderSection autoencoder;
  gan::GeneratorConfig generator;
  gan::DiscriminatorConfig discriminator;
  objectives::WeightedLearningConfig weighting;
  objectives::RecNorm rec_norm = objectives::RecNorm::kL1;
  objectives::DLossForm d_loss_form = objectives::DLossForm::kSoftplus;
  double r1_gamma = 0.05;
  int lazy_interval = 15;
  double lr_g = 1e-3;
  double lr_d = 1e-3;
  std::size_t batch_size = 256;
  int num_epochs = 500;
  double ema_decay = 0.99;
  std::optional<std::uint64_t> seed;  // unset until resolved
  int checkpoint_every = 0;
  bool log_timing = false;
  std::string out_dir = "runs/default";
  SamplingSection sampling;

  RunConfig();

  // Data layout the GAN sees: point dimension or latent channels.
  std::size_t data_channels() const;
  // Copies shared values (data channels, max timestep, epoch count) into the
  // sub-configs and validates them.
  void finalize();
  training::TrainConfig train_config() const;
  std::uint64_t seed_or_default() const;
};

// TOML subset: [section] headers, key = value with integers, floats,
// booleans, double-quoted strings and flat integer arrays, '#' comments.
// Unknown sections and keys are rejected with ConfigError.
RunConfig parse(const std::string& text, const std::string& origin = "<string>");
RunConfig load(const std::filesystem::path& path);
// Every key, in a stable order. parse(serialize(c)) == c field for field.
std::string serialize(const RunConfig& config);

// Seed precedence: command-line override, explicit config value, the
// LDDGAN_SEED environment variable, then 0.
void resolve_seed(RunConfig& config, std::optional<std::uint64_t> cli_seed);

// Loads the configured dataset. For gaussians25 this is the training set.
Tensor load_dataset(const DatasetSpec& spec);
// Held-out real points for evaluation of synthetic point data.
Tensor holdout_set(const DatasetSpec& spec);

}  // namespace lddgan::config

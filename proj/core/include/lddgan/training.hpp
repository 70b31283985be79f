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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lddgan/checkpoint.hpp"
#include "lddgan/diffusion.hpp"
#include "lddgan/gan.hpp"
#include "lddgan/objectives.hpp"
#include "lddgan/optim.hpp"

namespace lddgan::training {

struct TrainConfig {
  int T = 4;
  double beta_min = 0.1;
  double beta_max = 0.0;  // 0 selects default_beta_max
  diffusion::ScheduleKind schedule_kind = diffusion::ScheduleKind::kLinear;

  gan::GeneratorConfig generator;
  gan::DiscriminatorConfig discriminator;

  double lr_g = 1.6e-4;
  double lr_d = 1.25e-4;
  std::size_t batch_size = 64;
  int num_epochs = 1;
  objectives::WeightedLearningConfig weighting;
  objectives::RecNorm rec_norm = objectives::RecNorm::kL1;
  objectives::DLossForm d_loss_form = objectives::DLossForm::kSoftplus;
  double r1_gamma = 0.05;
  int lazy_interval = 15;
  double ema_decay = 0.999;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;  // epochs between periodic checkpoints; 0 = final only
  bool log_timing = false;   // fill the seconds column; off keeps logs reproducible

  void validate() const;
  diffusion::NoiseSchedule schedule() const;
  // Schedule of another length with the same beta_min and spacing; beta_max
  // is re-derived so the terminal state stays near isotropic. T must not
  // exceed the generator's max_timestep.
  diffusion::NoiseSchedule schedule_for_length(int steps) const;
};

struct ModelState {
  ModelState(const TrainConfig& config);

  gan::Generator generator;
  gan::Discriminator discriminator;
  OptimizerState opt_g;
  OptimizerState opt_d;
  EmaState ema;
  int epoch = 0;             // completed epochs
  std::uint64_t step = 0;    // completed generator steps
  std::uint64_t d_steps = 0;
  std::uint64_t seed = 0;    // every random draw derives from this and the counters
};

struct StepMetrics {
  std::uint64_t step = 0;
  int epoch = 0;
  double t_mean = 0.0;
  double d_loss = 0.0;
  double g_adv = 0.0;
  double g_rec = 0.0;
  double lambda = 0.0;
  double r1 = 0.0;
  bool r1_applied = false;
  double seconds = 0.0;
};

// One discriminator update followed by one generator update and an EMA
// update. Throws NumericError on a non-finite loss before touching state.
StepMetrics train_gan_step(const Tensor& x0, ModelState& state, const diffusion::NoiseSchedule& sched,
                           const TrainConfig& config);

// Real training pair: x_prev ~ q(x_{t-1} | x0), x_t ~ q(x_t | x_prev).
struct RealPair {
  std::vector<int> t;
  Tensor x_prev;
  Tensor x_t;
};
RealPair make_real_pair(const Tensor& x0, const diffusion::NoiseSchedule& sched, RngStream& rng);

io::TensorArchive to_archive(const ModelState& state);
// Throws ShapeError naming the tensor when the archive was written for a
// different configuration.
void from_archive(const io::TensorArchive& archive, ModelState& state);

void save_checkpoint(const ModelState& state, const std::filesystem::path& path);
ModelState load_checkpoint(const std::filesystem::path& path, const TrainConfig& config);

// Generator parameters with the EMA shadow swapped in.
gan::Generator ema_generator(const ModelState& state);
// Generator from a checkpoint, EMA weights unless raw is requested.
gan::Generator load_generator(const io::TensorArchive& archive, const gan::GeneratorConfig& config,
                              bool use_ema);

inline constexpr const char* kLogHeader = "step,epoch,t_mean,d_loss,g_adv,g_rec,lambda,r1,seconds";
std::string format_log_row(const StepMetrics& m);

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> resume_from;
  std::function<void(const StepMetrics&)> on_step;
};

struct RunResult {
  std::filesystem::path checkpoint;
  std::filesystem::path log;
  std::uint64_t steps = 0;
  int epochs = 0;
};

// Epoch loop over `data` (leading axis = items). Writes out_dir/train_log.csv,
// out_dir/checkpoint.lddg and, on cadence, out_dir/checkpoint_epoch<k>.lddg.
// A non-finite loss writes out_dir/diagnostic.lddg and rethrows.
RunResult run_training(const TrainConfig& config, const Tensor& data, const RunOptions& options);
// Same loop returning the in-memory state; no files are written.
ModelState train_in_memory(const TrainConfig& config, const Tensor& data,
                           const std::function<void(const StepMetrics&)>& on_step = {});

// Deterministic visiting order of the items for one epoch.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch);

}  // namespace lddgan::training

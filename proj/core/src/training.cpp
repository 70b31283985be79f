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

#include "lddgan/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "lddgan/error.hpp"

namespace lddgan::training {
namespace {

using diffusion::NoiseSchedule;

std::vector<Tensor> gradient_values(const Var& loss, const ParamSet& params) {
  auto grads = grad(loss, params.vars());
  std::vector<Tensor> out;
  out.reserve(grads.size());
  for (auto& g : grads) out.push_back(g.value());
  return out;
}

void put_params(io::TensorArchive& a, const std::string& prefix, const ParamSet& p,
                std::span<const Tensor> values) {
  for (std::size_t i = 0; i < p.size(); ++i) a.put(prefix + p.name(i), values[i]);
}

std::vector<Tensor> get_params(const io::TensorArchive& a, const std::string& prefix, const ParamSet& p) {
  std::vector<Tensor> out;
  out.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::string name = prefix + p.name(i);
    const Tensor& t = a.get(name);
    if (t.shape() != p.var(i).shape()) {
      throw ShapeError("checkpoint tensor '" + name + "' has shape " + shape_str(t.shape()) + ", expected " +
                       shape_str(p.var(i).shape()));
    }
    out.push_back(t);
  }
  return out;
}

void put_optimizer(io::TensorArchive& a, const std::string& prefix, const ParamSet& p, const OptimizerState& s) {
  put_params(a, prefix + "m/", p, s.m);
  put_params(a, prefix + "v/", p, s.v);
}

void get_optimizer(const io::TensorArchive& a, const std::string& prefix, const ParamSet& p, OptimizerState& s) {
  s.m = get_params(a, prefix + "m/", p);
  s.v = get_params(a, prefix + "v/", p);
}

std::vector<int> draw_timesteps(std::size_t n, int T, RngStream& rng) {
  std::vector<int> t(n);
  for (auto& v : t) v = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(T)));
  return t;
}

void check_finite(double v, const char* what, std::uint64_t step) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string(what) + " is not finite at step " + std::to_string(step));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (T < 1 || T > generator.max_timestep) {
    throw ConfigError("schedule T = " + std::to_string(T) + " must be in [1, " +
                      std::to_string(generator.max_timestep) + "]");
  }
  if (generator.max_timestep != discriminator.max_timestep) {
    throw ConfigError("generator and discriminator max_timestep differ");
  }
  if (generator.data_channels != discriminator.data_channels || generator.mode != discriminator.mode) {
    throw ConfigError("generator and discriminator disagree on data layout");
  }
  generator.validate();
  discriminator.validate();
  if (!(lr_g > 0) || !(lr_d > 0)) throw ConfigError("learning rates must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (num_epochs < 1) throw ConfigError("num_epochs must be at least 1");
  weighting.validate();
  if (weighting.num_epochs != num_epochs) throw ConfigError("weighting num_epochs must equal training num_epochs");
  if (!(r1_gamma >= 0)) throw ConfigError("r1_gamma must be nonnegative");
  if (lazy_interval < 1) throw ConfigError("lazy_interval must be at least 1");
  if (!(ema_decay > 0 && ema_decay < 1)) throw ConfigError("ema_decay must lie in (0, 1)");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be nonnegative");
  schedule();
}

NoiseSchedule TrainConfig::schedule() const {
  const double bmax = beta_max > 0 ? beta_max : diffusion::default_beta_max(T, beta_min, schedule_kind);
  return diffusion::build_schedule(T, beta_min, bmax, schedule_kind);
}

NoiseSchedule TrainConfig::schedule_for_length(int steps) const {
  if (steps == T) return schedule();
  if (steps < 1 || steps > generator.max_timestep) {
    throw ConfigError("T = " + std::to_string(steps) + " is outside the generator's range [1, " +
                      std::to_string(generator.max_timestep) + "]");
  }
  return diffusion::build_schedule(steps, beta_min, diffusion::default_beta_max(steps, beta_min, schedule_kind),
                                   schedule_kind);
}

ModelState::ModelState(const TrainConfig& config)
    : generator(config.generator, RngStream(config.seed).derive("generator").next_u64()),
      discriminator(config.discriminator, RngStream(config.seed).derive("discriminator").next_u64()),
      opt_g(make_adam_state(generator.params(), AdamConfig{config.lr_g, 0.5, 0.9, 1e-8})),
      opt_d(make_adam_state(discriminator.params(), AdamConfig{config.lr_d, 0.5, 0.9, 1e-8})),
      ema(make_ema(generator.params(), config.ema_decay)),
      seed(config.seed) {}

RealPair make_real_pair(const Tensor& x0, const NoiseSchedule& sched, RngStream& rng) {
  NoGradGuard guard;
  const std::size_t n = x0.dim(0);
  RealPair pair;
  pair.t = draw_timesteps(n, sched.T, rng);
  std::vector<int> prev(pair.t);
  for (auto& v : prev) --v;
  const Tensor n1 = gaussian_sample(rng, x0.shape());
  const Tensor n2 = gaussian_sample(rng, x0.shape());
  pair.x_prev = diffusion::q_sample(constant(x0), prev, n1, sched).value();
  pair.x_t = diffusion::forward_step(constant(pair.x_prev), pair.t, n2, sched).value();
  return pair;
}

StepMetrics train_gan_step(const Tensor& x0, ModelState& state, const NoiseSchedule& sched,
                           const TrainConfig& config) {
  RngStream rng = RngStream(state.seed).derive("gan-step", state.step);
  const auto& gen = state.generator;
  const auto& disc = state.discriminator;
  const std::size_t n = x0.dim(0);
  const Shape zshape{n, config.generator.z_dim};

  const RealPair real = make_real_pair(x0, sched, rng);
  const Var x_prev = constant(real.x_prev);
  const Var x_t = constant(real.x_t);
  StepMetrics m;
  m.step = state.step;
  m.epoch = state.epoch;
  m.t_mean = std::accumulate(real.t.begin(), real.t.end(), 0.0) / static_cast<double>(n);

  // Discriminator update.
  Var fake_prev;
  {
    NoGradGuard guard;
    const Var z = constant(gaussian_sample(rng, zshape));
    const Var x0_pred = gen.forward(x_t, z, real.t);
    fake_prev = diffusion::posterior_sample(x0_pred, x_t, real.t, gaussian_sample(rng, x0.shape()), sched);
  }
  const Var real_logit = disc.forward(x_prev, x_t, real.t);
  const Var fake_logit = disc.forward(fake_prev, x_t, real.t);
  Var d_total = objectives::d_loss(real_logit, fake_logit, config.d_loss_form);
  m.d_loss = d_total.item();
  check_finite(m.d_loss, "discriminator loss", state.step);
  if (config.r1_gamma > 0 && state.d_steps % static_cast<std::uint64_t>(config.lazy_interval) == 0) {
    const auto& t = real.t;
    const objectives::PairCritic critic = [&disc, &t](const Var& a, const Var& b) { return disc.forward(a, b, t); };
    const Var r1 = objectives::r1_penalty(critic, real.x_prev, real.x_t, config.r1_gamma);
    m.r1 = r1.item();
    m.r1_applied = true;
    check_finite(m.r1, "R1 penalty", state.step);
    d_total = d_total + r1;
  }
  const auto d_grads = gradient_values(d_total, disc.params());

  // Generator update against the pre-step discriminator.
  const Var z = constant(gaussian_sample(rng, zshape));
  const Var x0_pred = gen.forward(x_t, z, real.t);
  const Var g_prev = diffusion::posterior_sample(x0_pred, x_t, real.t, gaussian_sample(rng, x0.shape()), sched);
  const Var g_logit = disc.forward(g_prev, x_t, real.t);
  const Var adv = objectives::g_adv_loss(g_logit);
  const Var rec = objectives::rec_loss(constant(x0), x0_pred, config.rec_norm);
  m.lambda = objectives::effective_lambda(state.epoch, config.weighting);
  const Var g_total = objectives::g_total_loss(adv, rec, m.lambda, config.weighting.mode);
  m.g_adv = adv.item();
  m.g_rec = rec.item();
  check_finite(g_total.item(), "generator loss", state.step);
  const auto g_grads = gradient_values(g_total, gen.params());

  adam_step(state.discriminator.params(), d_grads, state.opt_d);
  adam_step(state.generator.params(), g_grads, state.opt_g);
  ema_update(state.ema, state.generator.params());
  ++state.d_steps;
  ++state.step;
  return m;
}

io::TensorArchive to_archive(const ModelState& s) {
  io::TensorArchive a;
  const auto& gp = s.generator.params();
  const auto& dp = s.discriminator.params();
  put_params(a, "generator/", gp, gp.values());
  put_params(a, "discriminator/", dp, dp.values());
  put_params(a, "ema/", gp, s.ema.shadow);
  put_optimizer(a, "opt_g/", gp, s.opt_g);
  put_optimizer(a, "opt_d/", dp, s.opt_d);
  a.put("state/counters", Tensor({5}, {static_cast<double>(s.epoch), static_cast<double>(s.step),
                                       static_cast<double>(s.d_steps), static_cast<double>(s.opt_g.step),
                                       static_cast<double>(s.opt_d.step)}));
  a.put("state/seed", Tensor({2}, {static_cast<double>(s.seed >> 32), static_cast<double>(s.seed & 0xffffffffu)}));
  return a;
}

void from_archive(const io::TensorArchive& a, ModelState& s) {
  auto gp = get_params(a, "generator/", s.generator.params());
  auto dp = get_params(a, "discriminator/", s.discriminator.params());
  auto ema = get_params(a, "ema/", s.generator.params());
  get_optimizer(a, "opt_g/", s.generator.params(), s.opt_g);
  get_optimizer(a, "opt_d/", s.discriminator.params(), s.opt_d);
  const Tensor& c = a.get("state/counters");
  const Tensor& seed = a.get("state/seed");
  if (c.size() != 5 || seed.size() != 2) throw FormatError("malformed state tensors", 0);
  s.generator.params().set_values(gp);
  s.discriminator.params().set_values(dp);
  s.ema.shadow = std::move(ema);
  s.epoch = static_cast<int>(c[0]);
  s.step = static_cast<std::uint64_t>(c[1]);
  s.d_steps = static_cast<std::uint64_t>(c[2]);
  s.opt_g.step = static_cast<std::uint64_t>(c[3]);
  s.opt_d.step = static_cast<std::uint64_t>(c[4]);
  s.seed = (static_cast<std::uint64_t>(seed[0]) << 32) | static_cast<std::uint64_t>(seed[1]);
}

void save_checkpoint(const ModelState& state, const std::filesystem::path& path) {
  io::save_checkpoint_file(path, to_archive(state));
}

ModelState load_checkpoint(const std::filesystem::path& path, const TrainConfig& config) {
  ModelState s(config);
  from_archive(io::load_checkpoint_file(path), s);
  return s;
}

gan::Generator ema_generator(const ModelState& state) {
  // A copied Generator would alias the live parameter nodes.
  gan::Generator g(state.generator.config(), 0);
  g.params().set_values(state.ema.shadow);
  return g;
}

gan::Generator load_generator(const io::TensorArchive& archive, const gan::GeneratorConfig& config, bool use_ema) {
  gan::Generator g(config, 0);
  g.params().set_values(get_params(archive, use_ema ? "ema/" : "generator/", g.params()));
  return g;
}

std::string format_log_row(const StepMetrics& m) {
  return fmt::format("{},{},{},{},{},{},{},{},{}", m.step, m.epoch, m.t_mean, m.d_loss, m.g_adv, m.g_rec, m.lambda,
                     m.r1, m.seconds);
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  RngStream rng = RngStream(seed).derive("epoch-order", static_cast<std::uint64_t>(epoch));
  return permutation(n, rng);
}

namespace {

template <typename OnEpochEnd>
void epoch_loop(const TrainConfig& config, const Tensor& data, ModelState& state,
                const std::function<void(const StepMetrics&)>& on_step, OnEpochEnd on_epoch_end) {
  const NoiseSchedule sched = config.schedule();
  const std::size_t n = data.dim(0);
  if (n == 0) throw ConfigError("training data is empty");
  using Clock = std::chrono::steady_clock;
  while (state.epoch < config.num_epochs) {
    const auto order = epoch_order(n, state.seed, state.epoch);
    for (std::size_t b = 0; b < n; b += config.batch_size) {
      const std::size_t e = std::min(n, b + config.batch_size);
      const Tensor batch = data.rows(std::span<const std::size_t>(order).subspan(b, e - b));
      const auto start = Clock::now();
      StepMetrics m = train_gan_step(batch, state, sched, config);
      if (config.log_timing) m.seconds = std::chrono::duration<double>(Clock::now() - start).count();
      if (on_step) on_step(m);
    }
    ++state.epoch;
    on_epoch_end(state);
  }
}

}  // namespace

ModelState train_in_memory(const TrainConfig& config, const Tensor& data,
                           const std::function<void(const StepMetrics&)>& on_step) {
  config.validate();
  ModelState state(config);
  epoch_loop(config, data, state, on_step, [](const ModelState&) {});
  return state;
}

RunResult run_training(const TrainConfig& config, const Tensor& data, const RunOptions& options) {
  config.validate();
  const auto& dir = options.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  ModelState state = options.resume_from ? load_checkpoint(*options.resume_from, config) : ModelState(config);
  RunResult result{dir / "checkpoint.lddg", dir / "train_log.csv", 0, 0};

  const bool append = options.resume_from.has_value() && std::filesystem::exists(result.log);
  std::ofstream log(result.log, append ? std::ios::app : std::ios::trunc);
  if (!log) throw IoError("cannot open training log '" + result.log.string() + "'");
  if (!append) log << kLogHeader << '\n';

  const auto on_step = [&](const StepMetrics& m) {
    log << format_log_row(m) << '\n';
    if (!log) throw IoError("failed writing training log '" + result.log.string() + "'");
    if (options.on_step) options.on_step(m);
  };
  const auto on_epoch_end = [&](const ModelState& s) {
    if (config.checkpoint_every > 0 && s.epoch % config.checkpoint_every == 0 && s.epoch < config.num_epochs) {
      save_checkpoint(s, dir / fmt::format("checkpoint_epoch{}.lddg", s.epoch));
    }
  };
  try {
    epoch_loop(config, data, state, on_step, on_epoch_end);
  } catch (const NumericError&) {
    log.flush();
    save_checkpoint(state, dir / "diagnostic.lddg");
    throw;
  }
  log.flush();
  save_checkpoint(state, result.checkpoint);
  result.steps = state.step;
  result.epochs = state.epoch;
  return result;
}

}  // namespace lddgan::training

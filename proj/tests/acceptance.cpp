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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when a criterion fails that was not listed with --expect-fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "cli.hpp"
#include "lddgan/ablation.hpp"
#include "lddgan/autoencoder.hpp"
#include "lddgan/checkpoint.hpp"
#include "lddgan/config.hpp"
#include "lddgan/data.hpp"
#include "lddgan/diffusion.hpp"
#include "lddgan/gan.hpp"
#include "lddgan/gradcheck.hpp"
#include "lddgan/metrics.hpp"
#include "lddgan/objectives.hpp"
#include "lddgan/sampler.hpp"
#include "lddgan/training.hpp"

#include "fd_cases.hpp"
#include "reference_metrics.hpp"

namespace fs = std::filesystem;
using namespace lddgan;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

// ---- 1: posterior sampler against rejection from the forward chain ----

Outcome posterior_matches_bayes() {
  const auto start = Clock::now();
  const int T = 4;
  const auto s = diffusion::build_schedule(T, 0.1, diffusion::default_beta_max(T, 0.1, diffusion::ScheduleKind::kLinear));
  const double x0 = 0.8, half = 0.005;
  const std::size_t n = 100000;
  double worst = 0.0;
  std::string parts;
  bool ok = true;
  for (int t = 2; t <= T; ++t) {
    const double centre = std::sqrt(s.alpha_bar[t]) * x0 + 0.3 * std::sqrt(1 - s.alpha_bar[t]);
    std::vector<double> accepted;
    accepted.reserve(n);
    RngStream rng = RngStream(41).derive("chain", t);
    const double m = std::sqrt(s.alpha_bar[t - 1]) * x0, sd = std::sqrt(1 - s.alpha_bar[t - 1]);
    while (accepted.size() < n) {
      const auto z = rng.normal_pair();
      const double prev = m + sd * z[0];
      const double next = std::sqrt(s.alpha[t]) * prev + std::sqrt(s.beta[t]) * z[1];
      if (std::abs(next - centre) < half) accepted.push_back(prev);
    }
    RngStream prng = RngStream(5).derive("posterior", t);
    const Var draws = diffusion::posterior_sample(constant(Tensor({n}, x0)), constant(Tensor({n}, centre)), t,
                                                  gaussian_sample(prng, {n}), s);
    const double ks = ks_statistic(accepted, draws.value().storage());
    worst = std::max(worst, ks);
    ok = ok && ks < 0.02;
    parts += fmt::format(" t{}={:.4f}", t, ks);
  }
  // At t = 1 the reverse step returns the clean prediction itself.
  RngStream prng(6);
  const int t1[] = {1};
  const Var last = diffusion::posterior_sample(constant(Tensor({1, n}, x0)), constant(Tensor({1, n}, 0.3)), t1,
                                               gaussian_sample(prng, {1, n}), s);
  double off = 0.0;
  for (double v : last.value().storage()) off = std::max(off, std::abs(v - x0));
  ok = ok && off == 0.0;
  const double secs = seconds_since(start);
  ok = ok && secs < 60.0;
  return {ok, fmt::format("KS{} (tol 0.02, {} samples each); t1 max offset {}; {:.1f} s", parts, n, off, secs)};
}

// ---- 2: finite differences ----

gan::GeneratorConfig small_generator(gan::NetMode mode) {
  gan::GeneratorConfig c;
  c.mode = mode;
  c.data_channels = 2;
  c.base_channels = mode == gan::NetMode::kGrid ? 8 : 16;
  c.channel_multipliers = mode == gan::NetMode::kGrid ? std::vector<std::size_t>{1, 2} : std::vector<std::size_t>{1};
  c.num_res_blocks = 1;
  c.z_dim = 4;
  c.z_mapping_layers = 1;
  c.z_embed_dim = 8;
  c.time_embed_dim = 8;
  c.max_timestep = 4;
  return c;
}

gan::DiscriminatorConfig small_discriminator(gan::NetMode mode) {
  gan::DiscriminatorConfig c;
  c.mode = mode;
  c.data_channels = 2;
  c.base_channels = mode == gan::NetMode::kGrid ? 8 : 16;
  c.channel_multipliers = {1, 2};
  c.num_blocks = 1;
  c.time_embed_dim = 8;
  c.max_timestep = 4;
  return c;
}

Outcome gradients_match() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::string worst_where;
  std::size_t checks = 0;
  bool ok = true;
  auto record = [&](const std::string& name, const GradCheckReport& r) {
    ++checks;
    ok = ok && r.passed && r.max_rel_error < 1e-4;
    if (r.max_rel_error >= worst) {
      worst = r.max_rel_error;
      worst_where = name + " " + r.worst;
    }
    if (!r.passed) std::cerr << "  gradient check failed: " << name << " " << r.worst << " rel " << r.max_rel_error << "\n";
  };

  for (const auto& c : fd_cases::primitive_cases()) {
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
      RngStream rng = RngStream(2024).derive(c.name, trial);
      std::vector<Tensor> inputs;
      for (const Shape& sh : c.shapes) inputs.push_back(fd_cases::draw(rng, sh, c.positive));
      GradCheckOptions o;
      o.seed = trial;
      record(c.name, gradient_check(c.fn, inputs, o));
    }
  }

  const auto sched = diffusion::build_schedule(4, 0.1, diffusion::default_beta_max(4, 0.1, diffusion::ScheduleKind::kLinear));
  for (auto mode : {gan::NetMode::kVector, gan::NetMode::kGrid}) {
    const bool grid = mode == gan::NetMode::kGrid;
    gan::Generator g(small_generator(mode), 11);
    gan::Discriminator d(small_discriminator(mode), 12);
    const Shape shape = grid ? Shape{4, 4, 4, 2} : Shape{4, 2};
    RngStream rng(13);
    const Tensor x0 = gaussian_sample(rng, shape), e1 = gaussian_sample(rng, shape), e2 = gaussian_sample(rng, shape);
    const Tensor z = gaussian_sample(rng, {4, 4});
    const int t[] = {1, 2, 3, 4};
    const Tensor xt = diffusion::q_sample(constant(x0), t, e1, sched).value();
    GradCheckOptions o;
    o.max_elements_per_input = grid ? 6 : 0;

    auto g_loss = [&]() {
      const Var pred = g.forward(constant(xt), constant(z), t);
      const Var prev = diffusion::posterior_sample(pred, constant(xt), t, e2, sched);
      const Var adv = objectives::g_adv_loss(d.forward(prev, constant(xt), t));
      return objectives::g_total_loss(adv, objectives::rec_loss(constant(x0), pred), 0.7,
                                      objectives::WeightingMode::kWeighted);
    };
    record(std::string(grid ? "grid" : "vector") + " generator loss", parameter_gradient_check(g_loss, g.params(), o));

    const Tensor real_prev = diffusion::posterior_sample(constant(x0), constant(xt), t, e2, sched).value();
    const Tensor fake_prev = diffusion::posterior_sample(g.forward(constant(xt), constant(z), t), constant(xt), t, e2, sched).value();
    auto d_loss = [&]() {
      const Var real = d.forward(constant(real_prev), constant(xt), t);
      const Var fake = d.forward(constant(fake_prev), constant(xt), t);
      const auto critic = [&](const Var& a, const Var& b) { return d.forward(a, b, t); };
      return objectives::d_loss(real, fake) + objectives::r1_penalty(critic, real_prev, xt, 0.05);
    };
    record(std::string(grid ? "grid" : "vector") + " discriminator loss with R1",
           parameter_gradient_check(d_loss, d.params(), o));
  }
  const double secs = seconds_since(start);
  ok = ok && secs < 120.0;
  return {ok, fmt::format("{} checks, max rel {:.2e} ({}), tol 1e-4; {:.1f} s", checks, worst, worst_where, secs)};
}

// ---- 3: reconstruction weight ----

Outcome lambda_matches() {
  const int N = 400;
  double worst = 0.0;
  bool ends = true;
  for (double delta : {1.0, 5.0, 10.0}) {
    objectives::WeightedLearningConfig c;
    c.delta = delta;
    c.num_epochs = N;
    for (int e : {0, N / 4, N / 2, 3 * N / 4, N}) {
      const double phi = -delta + delta * e / N;
      const double expected = 1.0 - 1.0 / (1.0 + std::exp(-phi));
      worst = std::max(worst, std::abs(objectives::lambda_schedule(e, c) - expected));
    }
    ends = ends && objectives::lambda_schedule(0, c) == 1.0 / (1.0 + std::exp(-delta)) &&
           objectives::lambda_schedule(N, c) == 0.5;
  }
  return {worst < 1e-12 && ends,
          fmt::format("max |error| {:.2e} (tol 1e-12); endpoints exact: {}", worst, ends ? "yes" : "no")};
}

// ---- 4: Frechet distance closed forms ----

metrics::GaussianStats gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) { return {std::move(mean), std::move(cov)}; }

Outcome frechet_closed_forms() {
  Eigen::VectorXd m1(1), m2(1);
  m1 << 0.4;
  m2 << -2.1;
  Eigen::MatrixXd v(1, 1);
  v << 1.7;
  const double one_d = metrics::frechet_distance(gaussian(m1, v), gaussian(m2, v));
  const double e1 = std::abs(one_d - 2.5 * 2.5);

  RngStream rng(3);
  const Tensor a = gaussian_sample(rng, {50, 4});
  Eigen::MatrixXd raw(4, 4);
  for (int i = 0; i < 16; ++i) raw(i / 4, i % 4) = a[i];
  const Eigen::MatrixXd cov = raw * raw.transpose() + Eigen::MatrixXd::Identity(4, 4);
  const Eigen::VectorXd mean = Eigen::VectorXd::LinSpaced(4, -1.0, 2.0);
  const double same = metrics::frechet_distance(gaussian(mean, cov), gaussian(mean, cov));

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  const double scaled =
      metrics::frechet_distance(gaussian(zero, Eigen::MatrixXd::Identity(2, 2)), gaussian(zero, 4.0 * Eigen::MatrixXd::Identity(2, 2)));
  const double e3 = std::abs(scaled - 2.0);
  return {e1 < 1e-6 && std::abs(same) < 1e-10 && e3 < 1e-6,
          fmt::format("1-D error {:.1e}; identical {:.1e}; I vs 4I error {:.1e}", e1, same, e3)};
}

// ---- 5: precision and recall against brute force ----

Outcome precision_recall_exact() {
  int mismatches = 0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    RngStream rng = RngStream(77).derive("pair", trial);
    const std::size_t n = 10 + rng.uniform_int(191), m = 10 + rng.uniform_int(191), k = 1 + rng.uniform_int(5);
    const std::size_t d = 1 + rng.uniform_int(3);
    const Tensor real = gaussian_sample(rng, {n, d});
    Tensor fake = gaussian_sample(rng, {m, d});
    for (std::size_t i = 0; i < fake.size(); ++i) fake[i] = 1.3 * fake[i] + 0.4;
    const auto fast = metrics::improved_precision_recall(real, fake, k);
    const auto ref = metrics::reference::brute_force(real, fake, k);
    if (fast.precision != ref.precision || fast.recall != ref.recall) ++mismatches;
  }
  return {mismatches == 0, fmt::format("{} of 20 random pairs differ", mismatches)};
}

// ---- 6 and 7: 25-Gaussians runs ----

config::RunConfig gaussians_config() {
  config::RunConfig c;
  c.T = 4;
  c.batch_size = 256;
  c.num_epochs = 1000;
  return c;
}

struct MixtureRuns {
  std::vector<ablation::ArmResult> weighted, linear_fixed, adversarial_only;
};

std::string report_line(const ablation::ArmResult& r) {
  return fmt::format("{} seed {}: FD {:.4f} P {:.3f} R {:.3f} modes {} hq {:.3f} train {:.0f} s",
                     objectives::to_string(r.mode), r.seed, r.report.frechet, r.report.precision, r.report.recall,
                     r.report.modes, r.report.hq_fraction, r.train_seconds);
}

std::vector<ablation::ArmResult> run_seeds(objectives::WeightingMode mode) {
  std::vector<ablation::ArmResult> out;
  for (std::uint64_t seed : ablation::kDefaultSeeds) {
    out.push_back(ablation::run_arm(gaussians_config(), mode, seed));
    std::cerr << "  " << report_line(out.back()) << "\n";
  }
  return out;
}

double median_of(const std::vector<ablation::ArmResult>& runs, double metrics::MetricReport::*field) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(r.report.*field);
  return ablation::median(v);
}

double median_modes(const std::vector<ablation::ArmResult>& runs) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(r.report.modes);
  return ablation::median(v);
}

Outcome mixture_quality(const MixtureRuns& runs) {
  const auto& w = runs.weighted;
  double total = 0.0;
  for (const auto& r : w) total += r.train_seconds;
  const double modes = median_modes(w), hq = median_of(w, &metrics::MetricReport::hq_fraction);
  const double recall = median_of(w, &metrics::MetricReport::recall);
  const double fd = median_of(w, &metrics::MetricReport::frechet), precision = median_of(w, &metrics::MetricReport::precision);
  return {modes >= 24 && hq >= 0.85 && recall >= 0.90 && total <= 1800.0,
          fmt::format("median of 3 seeds: modes {} (>= 24), hq {:.3f} (>= 0.85), recall {:.3f} (>= 0.90), "
                      "FD {:.4f}, precision {:.3f}; training {:.0f} s for all seeds (<= 1800)",
                      modes, hq, recall, fd, precision, total)};
}

Outcome weighting_ablation(const MixtureRuns& runs) {
  const double rw = median_of(runs.weighted, &metrics::MetricReport::recall);
  const double rl = median_of(runs.linear_fixed, &metrics::MetricReport::recall);
  const double fw = median_of(runs.weighted, &metrics::MetricReport::frechet);
  const double fa = median_of(runs.adversarial_only, &metrics::MetricReport::frechet);
  return {rw >= rl && fw <= fa,
          fmt::format("median recall weighted {:.4f} vs linear_fixed {:.4f}; median FD weighted {:.4f} vs "
                      "adversarial_only {:.4f}",
                      rw, rl, fw, fa)};
}

// ---- 8 and 11: autoencoder ----

ae::AutoencoderConfig toy_autoencoder(std::size_t f, bool kl) {
  ae::AutoencoderConfig c;
  c.f = f;
  c.base_channels = 16;
  c.use_kl_penalty = kl;
  return c;
}

struct AeRun {
  int epochs = -1;  // first epoch below the target, -1 if never reached
  double mse = 0.0;
};

AeRun train_to_target(const ae::AutoencoderConfig& config, const Tensor& images, std::uint64_t seed, int cap) {
  ae::Autoencoder model(config, seed);
  AeRun out;
  ae::train_autoencoder(model, images, cap, 8, seed, [&](const ae::AeEpochStats& s) {
    out.mse = s.mse;
    if (s.mse < 0.01) {
      out.epochs = s.epoch;
      return false;
    }
    return true;
  });
  return out;
}

std::vector<AeRun> kl_free_runs;

Outcome kl_free_converges_faster(const Tensor& images) {
  std::vector<double> plain, kl;
  std::string parts;
  for (std::uint64_t seed : {1, 2, 3}) {
    const AeRun a = train_to_target(toy_autoencoder(2, false), images, seed, 100);
    const AeRun b = train_to_target(toy_autoencoder(2, true), images, seed, 100);
    kl_free_runs.push_back(a);
    plain.push_back(a.epochs < 0 ? 1e9 : a.epochs);
    kl.push_back(b.epochs < 0 ? 1e9 : b.epochs);
    parts += fmt::format(" seed {}: {} vs {};", seed, a.epochs, b.epochs);
  }
  const double mp = ablation::median(plain), mk = ablation::median(kl);
  return {mp < 1e9 && mp <= mk,
          fmt::format("epochs to MSE < 0.01 without vs with KL:{} medians {} vs {}", parts, mp, mk)};
}

Outcome autoencoder_shapes_and_fit(const Tensor& images) {
  bool shapes = true;
  std::string parts;
  for (std::size_t f : {2, 4, 8}) {
    ae::Autoencoder model(toy_autoencoder(f, false), 1);
    NoGradGuard guard;
    const Tensor batch = Tensor({2, 16, 16, 1}, 0.25);
    const Shape got = model.encode(constant(batch)).shape();
    shapes = shapes && got == Shape{2, 16 / f, 16 / f, model.config().latent_channels};
  }
  bool fit = true;
  for (std::size_t f : {2, 4, 8}) {
    AeRun r;
    if (f == 2 && !kl_free_runs.empty()) {
      r = kl_free_runs.front();
    } else {
      r = train_to_target(toy_autoencoder(f, false), images, 1, 150);
    }
    fit = fit && r.epochs > 0;
    parts += fmt::format(" f={}: MSE {:.4f} at epoch {};", f, r.mse, r.epochs);
  }
  return {shapes && fit, fmt::format("latent shapes {}; trained{}", shapes ? "ok" : "wrong", parts)};
}

// ---- 9: sampling cost ----

Outcome sampling_cost() {
  config::RunConfig rc;
  rc.finalize();
  const auto tc = rc.train_config();
  gan::Generator g(tc.generator, 1);
  std::vector<double> medians;
  bool nfe_ok = true;
  std::string parts;
  for (int T : {1, 2, 4, 8}) {
    const auto sched = tc.schedule_for_length(T);
    std::vector<double> times;
    for (int run = 0; run < 10; ++run) {
      sampler::SampleRequest req;
      req.count = 2000;
      req.seed = static_cast<std::uint64_t>(run);
      const auto res = sampler::sample(req, g, sched, {2});
      nfe_ok = nfe_ok && res.stats.nfe == T;
      times.push_back(res.stats.wall_seconds);
    }
    medians.push_back(ablation::median(times));
    parts += fmt::format(" T={}: {:.4f} s;", T, medians.back());
  }
  const bool monotone = std::is_sorted(medians.begin(), medians.end());
  return {nfe_ok && monotone, fmt::format("nfe = T: {}; median wall clock{}", nfe_ok ? "yes" : "no", parts)};
}

// ---- 10: reproducible training ----

std::string run_cli(std::vector<std::string> args, int& code) {
  args.insert(args.begin(), "lddgan");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << err.str();
  return out.str();
}

Outcome training_is_reproducible(const fs::path& work) {
  const fs::path dir = work / "repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  io::write_file(dir / "run.toml", R"([dataset]
count = 512

[generator]
base_channels = 32

[discriminator]
base_channels = 32

[training]
batch_size = 64
num_epochs = 20
seed = 5
checkpoint_every = 10
)");
  int a = 0, b = 0;
  run_cli({"train", "--config", (dir / "run.toml").string(), "--out-dir", (dir / "a").string()}, a);
  run_cli({"train", "--config", (dir / "run.toml").string(), "--out-dir", (dir / "b").string()}, b);
  if (a != 0 || b != 0) return {false, fmt::format("train exit codes {} and {}", a, b)};
  int same = 0, total = 0;
  for (const char* name : {"checkpoint.lddg", "checkpoint_epoch10.lddg", "train_log.csv"}) {
    ++total;
    same += io::read_file(dir / "a" / name) == io::read_file(dir / "b" / name);
  }
  return {same == total, fmt::format("{} of {} files byte-identical across two runs", same, total)};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "lddgan_acceptance";
  std::set<int> only, expected_failures;
  auto parse_list = [](const char* text, std::set<int>& into) {
    std::stringstream list(text);
    for (std::string item; std::getline(list, item, ',');) into.insert(std::stoi(item));
  };
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work-dir" && i + 1 < argc) {
      work = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      parse_list(argv[++i], only);
    } else if (arg == "--expect-fail" && i + 1 < argc) {
      parse_list(argv[++i], expected_failures);
    } else {
      std::cerr << "usage: acceptance [--work-dir DIR] [--only 1,2,...] [--expect-fail 7,...]\n";
      return 1;
    }
  }
  fs::create_directories(work);
  std::ofstream copy(work / "report.txt");

  std::vector<int> failed;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& check) {
    if (!only.empty() && !only.count(id)) return;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.passed) failed.push_back(id);
    const char* note = !o.passed && expected_failures.count(id) ? " (expected)" : "";
    const std::string line = fmt::format("[{}] {:>2} {}: {}{}", o.passed ? "PASS" : "FAIL", id, name, o.detail, note);
    std::cout << line << std::endl;
    copy << line << std::endl;
  };

  report(1, "posterior sampler", posterior_matches_bayes);
  report(2, "finite-difference gradients", gradients_match);
  report(3, "reconstruction weight schedule", lambda_matches);
  report(4, "Frechet distance", frechet_closed_forms);
  report(5, "precision and recall", precision_recall_exact);

  MixtureRuns runs;
  const bool mixture = only.empty() || only.count(6) || only.count(7);
  if (mixture) runs.weighted = run_seeds(objectives::WeightingMode::kWeighted);
  report(6, "25-Gaussians quality", [&] { return mixture_quality(runs); });
  if (only.empty() || only.count(7)) {
    runs.linear_fixed = run_seeds(objectives::WeightingMode::kLinearFixed);
    runs.adversarial_only = run_seeds(objectives::WeightingMode::kAdversarialOnly);
  }
  report(7, "weighting ablation", [&] { return weighting_ablation(runs); });

  const Tensor images = data::generate_toy_images(32, 16, 1);
  report(8, "autoencoder without KL", [&] { return kl_free_converges_faster(images); });
  report(9, "sampling cost", sampling_cost);
  report(10, "reproducible training", [&] { return training_is_reproducible(work); });
  report(11, "autoencoder shapes and fit", [&] { return autoencoder_shapes_and_fit(images); });

  int unexpected = 0;
  std::string ids;
  for (int id : failed) {
    unexpected += expected_failures.count(id) == 0;
    ids += fmt::format(" {}", id);
  }
  const std::string summary =
      failed.empty() ? "all criteria passed" : fmt::format("failed:{} ({} unexpected)", ids, unexpected);
  std::cout << summary << std::endl;
  copy << summary << std::endl;
  return unexpected == 0 ? 0 : 1;
}

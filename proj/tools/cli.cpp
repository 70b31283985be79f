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

#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lddgan/ablation.hpp"
#include "lddgan/autoencoder.hpp"
#include "lddgan/checkpoint.hpp"
#include "lddgan/config.hpp"
#include "lddgan/data.hpp"
#include "lddgan/error.hpp"
#include "lddgan/metrics.hpp"
#include "lddgan/sampler.hpp"
#include "lddgan/training.hpp"

namespace fs = std::filesystem;

namespace lddgan::cli {
namespace {

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

config::RunConfig resolve_config(const CommonOptions& o, Streams io, const std::string& fallback_config = "") {
  config::RunConfig cfg;
  std::string path = o.config_path.empty() ? fallback_config : o.config_path;
  if (!path.empty()) cfg = config::load(path);
  config::resolve_seed(cfg, o.seed);
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  cfg.finalize();
  io.err << "# resolved configuration\n" << config::serialize(cfg) << "# end configuration\n";
  return cfg;
}

fs::path autoencoder_path(const config::RunConfig& cfg) {
  return cfg.autoencoder.checkpoint.empty() ? fs::path(cfg.out_dir) / "autoencoder.lddg"
                                            : fs::path(cfg.autoencoder.checkpoint);
}

ae::Autoencoder load_autoencoder(const config::RunConfig& cfg) {
  ae::Autoencoder model(cfg.autoencoder.model, cfg.seed_or_default());
  ae::from_archive(io::load_checkpoint_file(autoencoder_path(cfg)), model);
  return model;
}

void write_config(const config::RunConfig& cfg, const fs::path& dir) {
  io::write_file(dir / "config.toml", config::serialize(cfg));
}

// Training data as the GAN sees it.
Tensor gan_data(const config::RunConfig& cfg) {
  if (cfg.dataset.is_image()) {
    const Tensor images = config::load_dataset(cfg.dataset);
    const ae::Autoencoder model = load_autoencoder(cfg);
    return ae::encode_dataset(model, images);
  }
  Tensor data = config::load_dataset(cfg.dataset);
  const std::size_t c = cfg.generator.data_channels;
  if (data.rank() < 2 || data.shape().back() != c) {
    throw ConfigError("dataset shape " + shape_str(data.shape()) + " does not end in " + std::to_string(c) +
                      " channels");
  }
  return data;
}

Shape sample_shape(const config::RunConfig& cfg) {
  switch (cfg.dataset.kind) {
    case config::DatasetKind::kGaussians25: return {2};
    case config::DatasetKind::kToyImages: {
      const std::size_t s = cfg.dataset.image_size;
      return cfg.autoencoder.model.latent_shape({s, s, cfg.autoencoder.model.image_channels});
    }
    case config::DatasetKind::kImageDir: {
      const Tensor images = config::load_dataset(cfg.dataset);
      Shape s(images.shape().begin() + 1, images.shape().end());
      return cfg.autoencoder.model.latent_shape(s);
    }
    case config::DatasetKind::kTensorFile: {
      const Tensor data = config::load_dataset(cfg.dataset);
      return Shape(data.shape().begin() + 1, data.shape().end());
    }
  }
  throw ConfigError("unsupported dataset kind");
}

Tensor as_rows(const Tensor& t) {
  if (t.rank() == 0) throw ShapeError("expected a set of samples, got a scalar");
  return t.reshaped({t.dim(0), t.size() / t.dim(0)});
}

int run_train_ae(const CommonOptions& o, Streams io) {
  config::RunConfig cfg = resolve_config(o, io);
  if (!cfg.dataset.is_image()) {
    throw ConfigError("train-ae needs an image dataset (toy_images or image_dir), got " +
                      config::to_string(cfg.dataset.kind));
  }
  const Tensor images = config::load_dataset(cfg.dataset);
  cfg.autoencoder.model.latent_shape(images.shape());
  const fs::path dir = cfg.out_dir;
  fs::create_directories(dir);
  write_config(cfg, dir);
  ae::Autoencoder model(cfg.autoencoder.model, cfg.seed_or_default());
  std::ofstream log(dir / "ae_log.csv");
  if (!log) throw IoError("cannot open '" + (dir / "ae_log.csv").string() + "'");
  log << "epoch,l1,kl,patch_g,patch_d,total,mse\n";
  double last_mse = 0.0;
  ae::train_autoencoder(model, images, cfg.autoencoder.epochs, cfg.autoencoder.batch_size, cfg.seed_or_default(),
                        [&](const ae::AeEpochStats& s) {
                          log << fmt::format("{},{},{},{},{},{},{}\n", s.epoch, s.mean.l1, s.mean.kl, s.mean.patch_g,
                                             s.mean.patch_d, s.mean.total, s.mse);
                          last_mse = s.mse;
                          return true;
                        });
  const double scale = ae::fit_latent_scale(model, images);
  const fs::path ckpt = autoencoder_path(cfg);
  io::save_checkpoint_file(ckpt, ae::to_archive(model));
  io.out << "epochs,mse,latent_scale,checkpoint\n"
         << fmt::format("{},{},{},{}\n", cfg.autoencoder.epochs, last_mse, scale, ckpt.string());
  return kExitOk;
}

int run_train(const CommonOptions& o, const std::string& resume, Streams io) {
  const config::RunConfig cfg = resolve_config(o, io);
  const Tensor data = gan_data(cfg);
  const fs::path dir = cfg.out_dir;
  fs::create_directories(dir);
  write_config(cfg, dir);
  training::RunOptions ro;
  ro.out_dir = dir;
  if (!resume.empty()) ro.resume_from = resume;
  const auto r = training::run_training(cfg.train_config(), data, ro);
  io.out << "steps,epochs,checkpoint,log\n"
         << fmt::format("{},{},{},{}\n", r.steps, r.epochs, r.checkpoint.string(), r.log.string());
  return kExitOk;
}

struct SampleOptions {
  std::string checkpoint;
  std::optional<std::size_t> count;
  std::optional<int> T;
  std::string out;
  bool raw = false;
  bool no_decode = false;
};

int run_sample(const CommonOptions& o, const SampleOptions& s, Streams io) {
  std::string fallback;
  if (!s.checkpoint.empty()) {
    const fs::path beside = fs::path(s.checkpoint).parent_path() / "config.toml";
    if (fs::exists(beside)) fallback = beside.string();
  }
  config::RunConfig cfg = resolve_config(o, io, fallback);
  const auto tc = cfg.train_config();
  const int steps = s.T ? *s.T : (cfg.sampling.T > 0 ? cfg.sampling.T : cfg.T);
  const auto sched = tc.schedule_for_length(steps);
  for (const auto& w : sched.warnings) io.err << "warning: " << w << "\n";

  std::optional<gan::Generator> gen;
  if (s.checkpoint.empty()) {
    io.err << "warning: no checkpoint given; sampling from an initialized generator\n";
    training::ModelState init(tc);
    gen.emplace(std::move(init.generator));
  } else {
    gen.emplace(training::load_generator(io::load_checkpoint_file(s.checkpoint), cfg.generator,
                                         cfg.sampling.use_ema && !s.raw));
  }

  sampler::SampleRequest req;
  req.count = s.count ? *s.count : cfg.sampling.count;
  req.seed = RngStream(cfg.seed_or_default()).derive("cli-sample").next_u64();
  req.T = steps;
  req.batch_size = cfg.sampling.batch_size;
  std::optional<ae::Autoencoder> model;
  if (cfg.dataset.is_image() && cfg.sampling.decode && !s.no_decode) {
    if (fs::exists(autoencoder_path(cfg))) {
      model.emplace(load_autoencoder(cfg));
      req.decode = true;
    } else {
      io.err << "warning: autoencoder checkpoint '" << autoencoder_path(cfg).string()
             << "' not found; writing latents only\n";
    }
  }
  const auto result = sampler::sample(req, *gen, sched, sample_shape(cfg), model ? &*model : nullptr);
  const fs::path out = s.out.empty() ? fs::path(cfg.out_dir) / "samples.lddt" : fs::path(s.out);
  io::save_tensor_file(out, result.samples);
  if (req.decode && result.samples.rank() == 4 && result.samples.dim(3) == 1) {
    fs::path grid = out;
    grid.replace_extension(".pgm");
    data::write_pgm_grid(grid, result.samples);
  }
  io.out << "nfe,wall_seconds,count\n"
         << fmt::format("{},{},{}\n", result.stats.nfe, result.stats.wall_seconds, result.stats.count);
  return kExitOk;
}

struct EvalOptions {
  std::string real;
  std::string fake;
  std::size_t k = 3;
  int nfe = 0;
  double seconds = 0.0;
};

int run_eval(const EvalOptions& e, Streams io) {
  io.err << "# resolved options\nreal = \"" << e.real << "\"\nfake = \"" << e.fake << "\"\nk = " << e.k
         << "\nnfe = " << e.nfe << "\nseconds = " << e.seconds << "\n# end options\n";
  const Tensor real = as_rows(io::load_tensor_file(e.real));
  const Tensor fake = as_rows(io::load_tensor_file(e.fake));
  auto r = metrics::evaluate(real, fake, e.k);
  r.nfe = e.nfe;
  r.seconds = e.seconds;
  io.out << metrics::kReportHeader << "\n" << metrics::format_report_row(r) << "\n";
  return kExitOk;
}

struct ScheduleOptions {
  int T = 4;
  double beta_min = 0.1;
  std::optional<double> beta_max;
  std::string kind = "linear";
  std::vector<double> betas;
  std::string action = "dump";
};

int run_schedule(const ScheduleOptions& s, Streams io) {
  if (s.action != "dump") throw ConfigError("unknown schedule action '" + s.action + "' (expected dump)");
  diffusion::NoiseSchedule sched;
  if (!s.betas.empty()) {
    io.err << "# resolved options\nbetas = " << s.betas.size() << " explicit values\n# end options\n";
    sched = diffusion::schedule_from_betas(s.betas);
  } else {
    const auto kind = diffusion::parse_schedule_kind(s.kind);
    const double bmax = s.beta_max ? *s.beta_max : diffusion::default_beta_max(s.T, s.beta_min, kind);
    io.err << "# resolved options\nT = " << s.T << "\nbeta_min = " << s.beta_min << "\nbeta_max = " << bmax
           << "\nkind = \"" << s.kind << "\"\n# end options\n";
    sched = diffusion::build_schedule(s.T, s.beta_min, bmax, kind, diffusion::TerminalCheck::kInspect);
  }
  for (const auto& w : sched.warnings) io.err << "warning: " << w << "\n";
  io.out << "t,beta,alpha,alpha_bar,coef_x0,coef_xt,posterior_var\n";
  for (int t = 1; t <= sched.T; ++t) {
    const auto i = static_cast<std::size_t>(t);
    io.out << fmt::format("{},{},{},{},{},{},{}\n", t, sched.beta[i], sched.alpha[i], sched.alpha_bar[i],
                          sched.coef_x0[i], sched.coef_xt[i], sched.posterior_var[i]);
  }
  return kExitOk;
}

int run_ablate(const CommonOptions& o, const std::vector<std::uint64_t>& seeds, const std::string& out,
               Streams io) {
  const config::RunConfig cfg = resolve_config(o, io);
  const auto result = ablation::run_ablation(cfg, ablation::kDefaultArms, seeds, [&](const ablation::ArmResult& r) {
    io.err << fmt::format("{} seed {}: frechet {:.4f} recall {:.4f} modes {} ({:.1f} s)\n",
                          objectives::to_string(r.mode), r.seed, r.report.frechet, r.report.recall, r.report.modes,
                          r.train_seconds);
  });
  const std::string csv = ablation::format_csv(result);
  if (!out.empty()) io::write_file(out, csv);
  io.out << csv;
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config_path, "Run configuration (TOML)");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "Seed; overrides the config and LDDGAN_SEED");
  cmd->add_option("--out-dir", o.out_dir, "Output directory; overrides training.out_dir");
}

}  // namespace

int cli_main(int argc, char** argv) { return cli_main(argc, argv, std::cout, std::cerr); }

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent denoising diffusion GAN toolkit"};
  app.require_subcommand(1);
  Streams io{out, err};

  CommonOptions common;
  auto* train_ae = app.add_subcommand("train-ae", "Train the autoencoder on an image dataset");
  add_common(train_ae, common, true);

  std::string resume;
  auto* train = app.add_subcommand("train", "Train the denoising GAN");
  add_common(train, common, true);
  train->add_option("--resume", resume, "Checkpoint to resume from");

  SampleOptions so;
  auto* sample = app.add_subcommand("sample", "Generate samples");
  add_common(sample, common, false);
  sample->add_option("--checkpoint", so.checkpoint, "GAN checkpoint (default: initialized model)");
  sample->add_option("--count", so.count, "Number of samples");
  sample->add_option("--T", so.T, "Number of denoising steps");
  sample->add_option("--out", so.out, "Output tensor file");
  sample->add_flag("--raw", so.raw, "Use raw instead of EMA generator weights");
  sample->add_flag("--no-decode", so.no_decode, "Keep latents even for image datasets");

  EvalOptions eo;
  auto* eval = app.add_subcommand("eval", "Compare real and generated samples");
  eval->add_option("--real", eo.real, "Real samples tensor file")->required();
  eval->add_option("--fake", eo.fake, "Generated samples tensor file")->required();
  eval->add_option("--k", eo.k, "Neighbourhood size for precision/recall");
  eval->add_option("--nfe", eo.nfe, "Generator evaluations per sample, copied to the report");
  eval->add_option("--seconds", eo.seconds, "Sampling wall-clock, copied to the report");

  ScheduleOptions sc;
  auto* schedule = app.add_subcommand("schedule", "Dump a noise schedule as CSV");
  schedule->add_option("action", sc.action, "dump");
  schedule->add_option("--T", sc.T, "Number of steps");
  schedule->add_option("--beta-min", sc.beta_min, "Smallest beta");
  schedule->add_option("--beta-max", sc.beta_max, "Largest beta (default: derived)");
  schedule->add_option("--kind", sc.kind, "linear or geometric");
  schedule->add_option("--betas", sc.betas, "Explicit per-step betas")->delimiter(',');

  std::vector<std::uint64_t> seeds = ablation::kDefaultSeeds;
  std::string ablate_out;
  auto* ablate = app.add_subcommand("ablate", "Compare reconstruction-weighting modes on gaussians25");
  add_common(ablate, common, false);
  ablate->add_option("--seeds", seeds, "Training seeds")->delimiter(',');
  ablate->add_option("--out", ablate_out, "Also write the CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (train_ae->parsed()) return run_train_ae(common, io);
    if (train->parsed()) return run_train(common, resume, io);
    if (sample->parsed()) return run_sample(common, so, io);
    if (eval->parsed()) return run_eval(eo, io);
    if (schedule->parsed()) return run_schedule(sc, io);
    if (ablate->parsed()) return run_ablate(common, seeds, ablate_out, io);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace lddgan::cli

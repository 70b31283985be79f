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

#include "lddgan/ablation.hpp"

#include <algorithm>
#include <chrono>

#include "lddgan/error.hpp"
#include "lddgan/sampler.hpp"
#include "lddgan/training.hpp"

namespace lddgan::ablation {

double median(std::vector<double> v) {
  if (v.empty()) throw ConfigError("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

metrics::MetricReport median_report(const std::vector<metrics::MetricReport>& reports) {
  const auto col = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : reports) v.push_back(static_cast<double>(get(r)));
    return median(v);
  };
  metrics::MetricReport m;
  m.frechet = col([](const auto& r) { return r.frechet; });
  m.precision = col([](const auto& r) { return r.precision; });
  m.recall = col([](const auto& r) { return r.recall; });
  m.modes = static_cast<int>(col([](const auto& r) { return r.modes; }));
  m.hq_fraction = col([](const auto& r) { return r.hq_fraction; });
  m.nfe = reports.front().nfe;
  m.seconds = col([](const auto& r) { return r.seconds; });
  m.n_samples = reports.front().n_samples;
  return m;
}

ArmResult run_arm(const config::RunConfig& base, objectives::WeightingMode mode, std::uint64_t seed) {
  if (base.dataset.kind != config::DatasetKind::kGaussians25) {
    throw ConfigError("ablation runs on the gaussians25 dataset");
  }
  config::RunConfig cfg = base;
  cfg.weighting.mode = mode;
  cfg.seed = seed;
  cfg.finalize();
  const auto tc = cfg.train_config();
  const Tensor data = config::load_dataset(cfg.dataset);

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto state = training::train_in_memory(tc, data);
  ArmResult r{mode, seed, {}, std::chrono::duration<double>(Clock::now() - start).count()};

  const auto gen = training::ema_generator(state);
  sampler::SampleRequest req;
  req.count = cfg.sampling.count;
  req.seed = RngStream(seed).derive("ablation-sample").next_u64();
  req.batch_size = cfg.sampling.batch_size;
  const auto sampled = sampler::sample(req, gen, tc.schedule(), {2});
  r.report = metrics::evaluate(config::holdout_set(cfg.dataset), sampled.samples);
  r.report.nfe = sampled.stats.nfe;
  r.report.seconds = sampled.stats.wall_seconds;
  return r;
}

AblationResult run_ablation(const config::RunConfig& base, const std::vector<objectives::WeightingMode>& arms,
                            const std::vector<std::uint64_t>& seeds,
                            const std::function<void(const ArmResult&)>& on_run) {
  if (arms.empty() || seeds.empty()) throw ConfigError("ablation needs at least one arm and one seed");
  AblationResult out;
  for (auto mode : arms) {
    std::vector<metrics::MetricReport> reports;
    for (auto seed : seeds) {
      out.runs.push_back(run_arm(base, mode, seed));
      reports.push_back(out.runs.back().report);
      if (on_run) on_run(out.runs.back());
    }
    out.medians.emplace_back(mode, median_report(reports));
  }
  return out;
}

std::string format_csv(const AblationResult& result) {
  std::string out = std::string("arm,seed,") + metrics::kReportHeader + "\n";
  for (const auto& r : result.runs) {
    out += objectives::to_string(r.mode) + "," + std::to_string(r.seed) + "," + metrics::format_report_row(r.report) +
           "\n";
  }
  for (const auto& [mode, m] : result.medians) {
    out += objectives::to_string(mode) + ",median," + metrics::format_report_row(m) + "\n";
  }
  return out;
}

}  // namespace lddgan::ablation

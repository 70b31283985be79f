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

#include <benchmark/benchmark.h>

#include "lddgan/autograd.hpp"
#include "lddgan/config.hpp"
#include "lddgan/data.hpp"
#include "lddgan/metrics.hpp"
#include "lddgan/nn.hpp"
#include "lddgan/params.hpp"
#include "lddgan/rng.hpp"
#include "lddgan/sampler.hpp"
#include "lddgan/training.hpp"

namespace lddgan {
namespace {

training::TrainConfig default_train_config() {
  config::RunConfig rc;
  rc.seed = 1;
  rc.finalize();
  return rc.train_config();
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RngStream rng(1);
  const Var a = constant(gaussian_sample(rng, {n, n})), b = constant(gaussian_sample(rng, {n, n}));
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b).value().data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);

void BM_Conv3x3(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  ParamSet ps;
  RngStream rng(2);
  const auto conv = nn::Conv2d::create(ps, "conv", c, c, 3, 1, rng);
  const Var x = constant(gaussian_sample(rng, {8, 16, 16, c}));
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(conv(x).value().data());
}
BENCHMARK(BM_Conv3x3)->Arg(16)->Arg(64);

void BM_GeneratorForward(benchmark::State& state) {
  const auto tc = default_train_config();
  const gan::Generator g(tc.generator, 1);
  const auto batch = static_cast<std::size_t>(state.range(0));
  RngStream rng(3);
  const Var x = constant(gaussian_sample(rng, {batch, 2}));
  const Var z = constant(gaussian_sample(rng, {batch, tc.generator.z_dim}));
  const std::vector<int> t(batch, 2);
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(g.forward(x, z, t).value().data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_GeneratorForward)->Arg(256)->Arg(1024);

void BM_TrainStep(benchmark::State& state) {
  const auto tc = default_train_config();
  training::ModelState model(tc);
  const auto sched = tc.schedule();
  const Tensor x0 = data::generate_25gaussians(tc.batch_size, 1);
  for (auto _ : state) benchmark::DoNotOptimize(training::train_gan_step(x0, model, sched, tc).d_loss);
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

void BM_Sample(benchmark::State& state) {
  const auto tc = default_train_config();
  const gan::Generator g(tc.generator, 1);
  const int T = static_cast<int>(state.range(0));
  const auto sched = tc.schedule_for_length(T);
  sampler::SampleRequest req;
  req.count = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(sampler::sample(req, g, sched, {2}).stats.nfe);
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Sample)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_PrecisionRecall(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor real = data::generate_25gaussians(n, 1), fake = data::generate_25gaussians(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::improved_precision_recall(real, fake).recall);
}
BENCHMARK(BM_PrecisionRecall)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Frechet(benchmark::State& state) {
  const Tensor real = data::generate_25gaussians(10000, 1), fake = data::generate_25gaussians(10000, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        metrics::frechet_distance(metrics::fit_gaussian_stats(real), metrics::fit_gaussian_stats(fake)));
  }
}
BENCHMARK(BM_Frechet);

}  // namespace
}  // namespace lddgan

BENCHMARK_MAIN();

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

#include <algorithm>
#include <chrono>

#include <gtest/gtest.h>

#include "lddgan/error.hpp"
#include "lddgan/sampler.hpp"
#include "lddgan/training.hpp"

namespace lddgan::sampler {
namespace {

gan::GeneratorConfig vector_g() {
  gan::GeneratorConfig g;
  g.mode = gan::NetMode::kVector;
  g.data_channels = 2;
  g.base_channels = 32;
  g.channel_multipliers = {1};
  g.num_res_blocks = 2;
  g.z_dim = 4;
  g.z_mapping_layers = 1;
  g.z_embed_dim = 8;
  g.time_embed_dim = 8;
  g.max_timestep = 8;
  return g;
}

diffusion::NoiseSchedule schedule(int T) {
  training::TrainConfig c;
  c.generator = vector_g();
  return c.schedule_for_length(T);
}

TEST(DenoiseStep, TerminalStepReturnsPrediction) {
  gan::Generator g(vector_g(), 1);
  const auto s = schedule(4);
  RngStream init(2);
  const Tensor x = gaussian_sample(init, {3, 2}), z = gaussian_sample(init, {3, 4});
  RngStream rng(5);
  const auto r = denoise_step(x, 1, z, g, s, rng);
  EXPECT_TRUE(bitwise_equal(r.x_prev, r.x0_pred));
  EXPECT_EQ(rng.counter(), 0u);
  const auto r2 = denoise_step(x, 3, z, g, s, rng);
  EXPECT_EQ(r2.x_prev.shape(), x.shape());
  EXPECT_EQ(r2.x0_pred.shape(), x.shape());
  EXPECT_EQ(rng.counter(), 3u);
  EXPECT_THROW(denoise_step(x, 5, z, g, s, rng), IndexError);
}

TEST(DenoiseStep, Deterministic) {
  gan::Generator g(vector_g(), 1);
  const auto s = schedule(4);
  RngStream init(2);
  const Tensor x = gaussian_sample(init, {3, 2}), z = gaussian_sample(init, {3, 4});
  RngStream a(9), b(9);
  EXPECT_TRUE(bitwise_equal(denoise_step(x, 4, z, g, s, a).x_prev, denoise_step(x, 4, z, g, s, b).x_prev));
}

TEST(Sample, NfeEqualsSteps) {
  gan::Generator g(vector_g(), 1);
  for (int T : {1, 2, 4, 8}) {
    SampleRequest req;
    req.count = 10;
    const auto r = sample(req, g, schedule(T), {2});
    EXPECT_EQ(r.stats.nfe, T);
    EXPECT_EQ(r.stats.count, 10u);
  }
}

TEST(Sample, CountAndShape) {
  gan::Generator g(vector_g(), 1);
  SampleRequest req;
  req.count = 100;
  req.batch_size = 32;
  const auto r = sample(req, g, schedule(4), {2});
  EXPECT_EQ(r.samples.shape(), (Shape{100, 2}));
  EXPECT_TRUE(r.samples.all_finite());
}

TEST(Sample, SeedDeterminesOutput) {
  gan::Generator g(vector_g(), 1);
  SampleRequest req;
  req.count = 20;
  req.seed = 4;
  const auto a = sample(req, g, schedule(4), {2});
  const auto b = sample(req, g, schedule(4), {2});
  EXPECT_TRUE(bitwise_equal(a.samples, b.samples));
  req.seed = 5;
  EXPECT_FALSE(bitwise_equal(a.samples, sample(req, g, schedule(4), {2}).samples));
}

TEST(Sample, RequestValidation) {
  gan::Generator g(vector_g(), 1);
  SampleRequest req;
  req.count = 0;
  EXPECT_THROW(sample(req, g, schedule(4), {2}), ConfigError);
  req.count = 1;
  req.T = 2;
  EXPECT_THROW(sample(req, g, schedule(4), {2}), ConfigError);
  req.T.reset();
  req.decode = true;
  EXPECT_THROW(sample(req, g, schedule(4), {2}), ConfigError);
}

TEST(Sample, DecodesToPixels) {
  ae::AutoencoderConfig ac;
  ac.base_channels = 8;
  ae::Autoencoder model(ac, 3);
  gan::GeneratorConfig gc;
  gc.mode = gan::NetMode::kGrid;
  gc.data_channels = 4;
  gc.base_channels = 8;
  gc.channel_multipliers = {1, 2};
  gc.num_res_blocks = 1;
  gc.z_dim = 4;
  gc.z_mapping_layers = 1;
  gc.z_embed_dim = 8;
  gc.time_embed_dim = 8;
  gan::Generator g(gc, 1);
  training::TrainConfig tc;
  tc.generator = gc;
  SampleRequest req;
  req.count = 3;
  req.decode = true;
  const auto r = sample(req, g, tc.schedule(), {4, 4, 4}, &model);
  EXPECT_EQ(r.samples.shape(), (Shape{3, 8, 8, 1}));
  for (double v : r.samples.data()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Sample, MoreStepsTakeLonger) {
  gan::Generator g(vector_g(), 1);
  auto median_time = [&](int T) {
    std::vector<double> t;
    SampleRequest req;
    req.count = 512;
    for (int i = 0; i < 10; ++i) t.push_back(sample(req, g, schedule(T), {2}).stats.wall_seconds);
    std::sort(t.begin(), t.end());
    return 0.5 * (t[4] + t[5]);
  };
  EXPECT_GT(median_time(8), median_time(2));
}

}  // namespace
}  // namespace lddgan::sampler

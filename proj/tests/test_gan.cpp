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

#include <cmath>

#include <gtest/gtest.h>

#include "lddgan/diffusion.hpp"
#include "lddgan/error.hpp"
#include "lddgan/gan.hpp"
#include "lddgan/gradcheck.hpp"
#include "lddgan/objectives.hpp"

namespace lddgan::gan {
namespace {

GeneratorConfig tiny_grid_g() {
  GeneratorConfig c;
  c.mode = NetMode::kGrid;
  c.data_channels = 2;
  c.base_channels = 8;
  c.channel_multipliers = {1, 2};
  c.num_res_blocks = 1;
  c.z_dim = 4;
  c.z_mapping_layers = 1;
  c.z_embed_dim = 8;
  c.time_embed_dim = 8;
  c.max_timestep = 4;
  return c;
}

DiscriminatorConfig tiny_grid_d() {
  DiscriminatorConfig c;
  c.mode = NetMode::kGrid;
  c.data_channels = 2;
  c.base_channels = 8;
  c.channel_multipliers = {1, 2};
  c.time_embed_dim = 8;
  c.max_timestep = 4;
  return c;
}

GeneratorConfig tiny_vector_g() {
  GeneratorConfig c;
  c.mode = NetMode::kVector;
  c.data_channels = 2;
  c.base_channels = 16;
  c.channel_multipliers = {1};
  c.num_res_blocks = 1;
  c.z_dim = 4;
  c.z_mapping_layers = 1;
  c.z_embed_dim = 8;
  c.time_embed_dim = 8;
  return c;
}

DiscriminatorConfig tiny_vector_d() {
  DiscriminatorConfig c;
  c.mode = NetMode::kVector;
  c.data_channels = 2;
  c.base_channels = 16;
  c.num_blocks = 1;
  c.time_embed_dim = 8;
  return c;
}

Tensor randn(std::uint64_t seed, const Shape& s) {
  RngStream r(seed);
  return gaussian_sample(r, s);
}

TEST(AdaptiveGroupNorm, ZeroHeadsOnConstantInput) {
  ParamSet ps;
  RngStream rng(1);
  auto agn = nn::AdaptiveGroupNorm::create(ps, "agn", 8, 4, rng);
  agn.head.weight.mutable_value() = Tensor(agn.head.weight.shape());
  agn.head.bias.mutable_value() = Tensor(agn.head.bias.shape());
  const Var out = agn(constant(Tensor({2, 3, 3, 8}, 1.25)), constant(randn(2, {2, 4})));
  for (double v : out.value().data()) EXPECT_EQ(v, 0.0);
}

TEST(AdaptiveGroupNorm, ShiftPassesThrough) {
  ParamSet ps;
  RngStream rng(1);
  auto agn = nn::AdaptiveGroupNorm::create(ps, "agn", 8, 4, rng);
  agn.head.weight.mutable_value() = Tensor(agn.head.weight.shape());
  Tensor bias(agn.head.bias.shape());
  for (std::size_t c = 8; c < 16; ++c) bias[c] = 0.75;
  agn.head.bias.mutable_value() = bias;
  const Var h = constant(randn(3, {2, 3, 3, 8}));
  const Var out = agn(h, constant(randn(4, {2, 4})));
  const Var ref = nn::group_normalize(h, 8);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out.value()[i], ref.value()[i] + 0.75, 1e-12);
}

TEST(AdaptiveGroupNorm, NormalizedStatistics) {
  const Var h = constant(randn(5, {3, 4, 4, 16}));
  const Var n = nn::group_normalize(h, 4);
  for (std::size_t b = 0; b < 3; ++b) {
    for (std::size_t g = 0; g < 4; ++g) {
      double m = 0.0, v = 0.0;
      std::size_t count = 0;
      for (std::size_t p = 0; p < 16; ++p) {
        for (std::size_t c = 4 * g; c < 4 * g + 4; ++c) {
          m += n.value()[b * 256 + p * 16 + c];
          ++count;
        }
      }
      m /= count;
      for (std::size_t p = 0; p < 16; ++p) {
        for (std::size_t c = 4 * g; c < 4 * g + 4; ++c) {
          const double d = n.value()[b * 256 + p * 16 + c] - m;
          v += d * d;
        }
      }
      v /= count;
      EXPECT_NEAR(m, 0.0, 1e-5);
      EXPECT_NEAR(v, 1.0, 1e-3);
    }
  }
}

TEST(AdaptiveGroupNorm, ChannelGroupMismatch) {
  EXPECT_EQ(nn::default_groups(4), 4u);
  EXPECT_EQ(nn::default_groups(64), 8u);
  EXPECT_THROW(nn::check_groups(12, 8), ConfigError);
  EXPECT_THROW(nn::group_normalize(constant(Tensor({2, 12})), 8), ConfigError);
}

TEST(Generator, GridShapeContract) {
  GeneratorConfig c = tiny_grid_g();
  c.data_channels = 4;
  Generator g(c, 1);
  const Var x = constant(randn(1, {2, 16, 16, 4}));
  const int t[] = {1, 4};
  const Var y = g.forward(x, constant(randn(2, {2, 4})), t);
  EXPECT_EQ(y.shape(), (Shape{2, 16, 16, 4}));
}

TEST(Generator, DeterministicAndZSensitive) {
  for (const GeneratorConfig& c : {tiny_grid_g(), tiny_vector_g()}) {
    Generator g(c, 3);
    const Shape xs = c.mode == NetMode::kGrid ? Shape{1, 4, 4, 2} : Shape{1, 2};
    const Var x = constant(randn(1, xs));
    const int t[] = {2};
    const Var z = constant(randn(2, {1, 4}));
    EXPECT_TRUE(bitwise_equal(g.forward(x, z, t).value(), g.forward(x, z, t).value()));
    double total = 0.0;
    for (std::uint64_t k = 0; k < 100; ++k) {
      const Var a = g.forward(x, constant(randn(100 + 2 * k, {1, 4})), t);
      const Var b = g.forward(x, constant(randn(101 + 2 * k, {1, 4})), t);
      double d = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) d += (a.value()[i] - b.value()[i]) * (a.value()[i] - b.value()[i]);
      total += std::sqrt(d);
    }
    EXPECT_GT(total / 100.0, 0.0);
  }
}

TEST(Generator, InputValidation) {
  Generator g(tiny_grid_g(), 1);
  const int t1[] = {1};
  const int t9[] = {9};
  EXPECT_THROW(g.forward(constant(Tensor({1, 4, 4, 3})), constant(Tensor({1, 4})), t1), ShapeError);
  EXPECT_THROW(g.forward(constant(Tensor({1, 4, 4, 2})), constant(Tensor({1, 5})), t1), ShapeError);
  EXPECT_THROW(g.forward(constant(Tensor({1, 4, 4, 2})), constant(Tensor({1, 4})), t9), IndexError);
  EXPECT_THROW(g.forward(constant(Tensor({1, 3, 3, 2})), constant(Tensor({1, 4})), t1), ShapeError);
  GeneratorConfig bad = tiny_grid_g();
  bad.z_mapping_layers = 0;
  EXPECT_THROW(Generator(bad, 1), ConfigError);
}

TEST(Generator, SameSeedSameParameters) {
  Generator a(tiny_grid_g(), 7), b(tiny_grid_g(), 7), c(tiny_grid_g(), 8);
  ASSERT_EQ(a.params().size(), b.params().size());
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    EXPECT_EQ(a.params().name(i), b.params().name(i));
    EXPECT_TRUE(bitwise_equal(a.params().var(i).value(), b.params().var(i).value()));
  }
  EXPECT_FALSE(bitwise_equal(a.params().var(0).value(), c.params().var(0).value()));
}

TEST(Discriminator, OneLogitPerPair) {
  for (const DiscriminatorConfig& c : {tiny_grid_d(), tiny_vector_d()}) {
    Discriminator d(c, 2);
    const Shape s = c.mode == NetMode::kGrid ? Shape{5, 4, 4, 2} : Shape{5, 2};
    const int t[] = {1, 2, 3, 4, 1};
    const Var out = d.forward(constant(randn(1, s)), constant(randn(2, s)), t);
    EXPECT_EQ(out.shape(), (Shape{5, 1}));
  }
  Discriminator d(tiny_vector_d(), 2);
  const int t[] = {1};
  EXPECT_THROW(d.forward(constant(Tensor({1, 2})), constant(Tensor({1, 3})), t), ShapeError);
}

TEST(Discriminator, GradientWithRespectToPreviousSample) {
  for (const DiscriminatorConfig& c : {tiny_grid_d(), tiny_vector_d()}) {
    Discriminator d(c, 4);
    const Shape s = c.mode == NetMode::kGrid ? Shape{3, 4, 4, 2} : Shape{3, 2};
    const Tensor xt = randn(9, s);
    const int t[] = {1, 3, 4};
    auto f = [&](const std::vector<Var>& v) { return sum_all(d.forward(v[0], constant(xt), t)); };
    const auto r = gradient_check(f, {randn(8, s)});
    EXPECT_TRUE(r.passed) << r.max_rel_error << " " << r.worst;
  }
}

TEST(MinibatchStddev, DuplicateBatchGivesZeroChannel) {
  const Tensor row = randn(3, {1, 6});
  Tensor batch({4, 6});
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 6; ++j) batch[i * 6 + j] = row[j];
  }
  const Var out = nn::minibatch_stddev(constant(batch));
  ASSERT_EQ(out.shape(), (Shape{4, 7}));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(out.value()[i * 7 + 6], 0.0);
  const Var other = nn::minibatch_stddev(constant(randn(4, {4, 6})));
  EXPECT_NE(other.value()[6], 0.0);
}

TEST(Discriminator, PermutingBatchPermutesLogits) {
  Discriminator d(tiny_vector_d(), 5);
  const Tensor a = randn(1, {4, 2}), b = randn(2, {4, 2});
  const int t[] = {1, 2, 3, 4};
  const Var out = d.forward(constant(a), constant(b), t);
  const std::size_t perm[] = {2, 0, 3, 1};
  const int tp[] = {3, 1, 4, 2};
  const Var outp = d.forward(constant(a.rows(perm)), constant(b.rows(perm)), tp);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(outp.value()[i], out.value()[perm[i]], 1e-12);
}

// Generator forward, posterior draw, discriminator and non-saturating loss,
// differentiated with respect to every generator parameter.
TEST(EndToEnd, GeneratorLossPassesFiniteDifferences) {
  for (bool grid : {false, true}) {
    Generator g(grid ? tiny_grid_g() : tiny_vector_g(), 11);
    Discriminator d(grid ? tiny_grid_d() : tiny_vector_d(), 12);
    const auto sched = diffusion::build_schedule(4, 0.1, diffusion::default_beta_max(4, 0.1, diffusion::ScheduleKind::kLinear));
    const Shape s = grid ? Shape{4, 4, 4, 2} : Shape{4, 2};
    const Tensor xt = randn(1, s), noise = randn(2, s), z = randn(3, {4, 4});
    const int t[] = {1, 2, 3, 4};
    auto loss = [&]() {
      const Var x0 = g.forward(constant(xt), constant(z), t);
      const Var prev = diffusion::posterior_sample(x0, constant(xt), t, noise, sched);
      return objectives::g_adv_loss(d.forward(prev, constant(xt), t));
    };
    GradCheckOptions o;
    o.max_elements_per_input = grid ? 6 : 0;
    const auto r = parameter_gradient_check(loss, g.params(), o);
    EXPECT_TRUE(r.passed) << (grid ? "grid " : "vector ") << r.max_rel_error << " at " << r.worst;
    EXPECT_GT(r.checked_elements, 0u);
  }
}

TEST(EndToEnd, DiscriminatorLossPassesFiniteDifferences) {
  Discriminator d(tiny_grid_d(), 12);
  const Shape s{3, 4, 4, 2};
  const Tensor a = randn(1, s), b = randn(2, s), c = randn(3, s);
  const int t[] = {1, 2, 4};
  auto loss = [&]() {
    return objectives::d_loss(d.forward(constant(a), constant(b), t), d.forward(constant(c), constant(b), t));
  };
  GradCheckOptions o;
  o.max_elements_per_input = 6;
  const auto r = parameter_gradient_check(loss, d.params(), o);
  EXPECT_TRUE(r.passed) << r.max_rel_error << " at " << r.worst;
}

}  // namespace
}  // namespace lddgan::gan

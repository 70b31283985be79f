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
#include <numeric>

#include <gtest/gtest.h>

#include "lddgan/autograd.hpp"
#include "lddgan/error.hpp"
#include "lddgan/gradcheck.hpp"
#include "lddgan/optim.hpp"
#include "lddgan/params.hpp"
#include "lddgan/rng.hpp"
#include "lddgan/tensor.hpp"

namespace lddgan {
namespace {

TEST(Tensor, ShapeAndFill) {
  Tensor t({3, 4}, 1.5);
  EXPECT_EQ(t.size(), 12u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.dim(1), 4u);
  EXPECT_DOUBLE_EQ(t[11], 1.5);
  EXPECT_THROW(t.dim(2), IndexError);
}

TEST(Tensor, ZeroExtentRejected) {
  EXPECT_THROW(Tensor({2, 0}), ShapeError);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>(3)), ShapeError);
}

TEST(Tensor, ScalarIsRankZero) {
  Tensor s = Tensor::scalar(2.5);
  EXPECT_EQ(s.rank(), 0u);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s.item(), 2.5);
}

TEST(Tensor, F32RoundsOnConstruction) {
  Tensor t({1}, std::vector<double>{0.1}, DType::kF32);
  EXPECT_EQ(t[0], static_cast<double>(0.1f));
  EXPECT_NE(t[0], 0.1);
}

TEST(Tensor, RowsCopiesSelection) {
  Tensor t({3, 2}, std::vector<double>{0, 1, 2, 3, 4, 5});
  const std::size_t idx[] = {2, 0};
  Tensor r = t.rows(idx);
  EXPECT_EQ(r.shape(), (Shape{2, 2}));
  EXPECT_DOUBLE_EQ(r[0], 4);
  EXPECT_DOUBLE_EQ(r[3], 1);
}

TEST(Rng, SameSeedSameDraws) {
  RngStream a(0), b(0);
  Tensor x = gaussian_sample(a, {2});
  Tensor y = gaussian_sample(b, {2});
  EXPECT_TRUE(bitwise_equal(x, y));
}

TEST(Rng, DistinctLabelsGiveDistinctStreams) {
  RngStream root(42);
  RngStream a = root.derive("alpha"), b = root.derive("beta"), c = root.derive("alpha", 1);
  const auto va = a.next_u64(), vb = b.next_u64(), vc = c.next_u64();
  EXPECT_NE(va, vb);
  EXPECT_NE(va, vc);
  EXPECT_EQ(root.derive("alpha").next_u64(), va);
}

TEST(Rng, GaussianMoments) {
  RngStream s(123);
  Tensor x = gaussian_sample(s, {1000000});
  double mean = std::accumulate(x.data().begin(), x.data().end(), 0.0) / x.size();
  double var = 0.0;
  for (double v : x.data()) var += (v - mean) * (v - mean);
  var /= x.size() - 1;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.01);
}

TEST(Rng, GaussianShapeContract) {
  RngStream s(1);
  EXPECT_EQ(gaussian_sample(s, {3, 4}).shape(), (Shape{3, 4}));
  EXPECT_THROW(gaussian_sample(s, {3, 0}), ShapeError);
}

TEST(Rng, GaussianConsumesHalfBlocks) {
  RngStream s(5);
  gaussian_sample(s, {5});
  EXPECT_EQ(s.counter(), 3u);
}

TEST(Rng, UniformIntRange) {
  RngStream s(9);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[s.uniform_int(7)];
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, PermutationIsBijection) {
  RngStream s(3);
  auto p = permutation(50, s);
  std::vector<std::size_t> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Philox, KnownAnswer) {
  // Random123 reference vector for philox4x32_10 with all-zero inputs.
  const auto out = philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(GradCheck, Quadratic) {
  auto f = [](const std::vector<Var>& in) { return sum_all(square(in[0])); };
  GradCheckOptions o;
  o.tolerance = 1e-8;
  const auto r = gradient_check(f, {Tensor::from({1.0, 2.0})}, o);
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.max_rel_error, 1e-8);
  Var x = Var::parameter(Tensor::from({1.0, 2.0}));
  const Var xs[] = {x};
  const auto g = grad(sum_all(square(x)), xs);
  EXPECT_DOUBLE_EQ(g[0].value()[0], 2.0);
  EXPECT_DOUBLE_EQ(g[0].value()[1], 4.0);
}

TEST(GradCheck, ConstantHasZeroGradient) {
  Var x = Var::parameter(Tensor::from({1.0, -3.0}));
  const Var xs[] = {x};
  const auto g = grad(constant(Tensor::scalar(7.0)) + 0.0 * sum_all(x), xs);
  EXPECT_EQ(g[0].value()[0], 0.0);
  EXPECT_EQ(g[0].value()[1], 0.0);
  auto f = [](const std::vector<Var>&) { return constant(Tensor::scalar(3.0)); };
  EXPECT_TRUE(gradient_check(f, {Tensor::from({1.0})}).passed);
}

TEST(GradCheck, FlagsAbsAtZero) {
  auto f = [](const std::vector<Var>& in) { return sum_all(abs(in[0])); };
  const auto r = gradient_check(f, {Tensor::from({0.0, 1.0})});
  EXPECT_TRUE(r.nondifferentiable_detected);
  EXPECT_GE(r.perturbed_elements, 1u);
  EXPECT_NE(r.final_inputs[0][0], 0.0);
  EXPECT_TRUE(r.passed);
}

TEST(GradCheck, DetectsWrongGradient) {
  // A deliberately broken rule: forward x^2, backward claims 3x.
  auto f = [](const std::vector<Var>& in) {
    Var y = make_op(Tensor::scalar(in[0].value()[0] * in[0].value()[0]), {in[0]},
                    [](const Var& g, const std::vector<Var>& x) { return std::vector<Var>{g * x[0] * 3.0}; },
                    "broken");
    return y;
  };
  EXPECT_FALSE(gradient_check(f, {Tensor::from({1.3})}).passed);
}

ParamSet one_param(double value) {
  ParamSet p;
  p.add("x", Tensor::from({value}));
  return p;
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParamSet p = one_param(0.0);
  auto st = make_adam_state(p, {1e-3, 0.5, 0.9, 1e-8});
  const Tensor g[] = {Tensor::from({1.0})};
  adam_step(p, g, st);
  EXPECT_NEAR(p.var(0).value()[0], -1e-3, 1e-10);
  EXPECT_EQ(st.step, 1u);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  ParamSet p = one_param(2.0);
  auto st = make_adam_state(p, {});
  const Tensor g1[] = {Tensor::from({1.0})};
  adam_step(p, g1, st);
  const double after_one = p.var(0).value()[0];
  const double m = st.m[0][0], v = st.v[0][0];
  ParamSet q = one_param(2.0);
  auto st0 = make_adam_state(q, {});
  const Tensor g0[] = {Tensor::from({0.0})};
  adam_step(q, g0, st0);
  EXPECT_EQ(q.var(0).value()[0], 2.0);
  EXPECT_EQ(st0.m[0][0], 0.0);
  adam_step(p, g0, st);
  EXPECT_DOUBLE_EQ(st.m[0][0], 0.5 * m);
  EXPECT_DOUBLE_EQ(st.v[0][0], 0.9 * v);
  EXPECT_NE(p.var(0).value()[0], after_one);  // momentum still carries
}

TEST(Adam, ConvergesOnQuadratic) {
  ParamSet p = one_param(0.0);
  auto st = make_adam_state(p, {0.1, 0.5, 0.9, 1e-8});
  for (int i = 0; i < 100; ++i) {
    const Var x = p.var(0);
    const Var loss = sum_all(square(x - 3.0));
    const Var xs[] = {x};
    const auto g = grad(loss, xs);
    const Tensor gt[] = {g[0].value()};
    adam_step(p, gt, st);
  }
  EXPECT_LT(std::abs(p.var(0).value()[0] - 3.0), 0.5);
}

TEST(Adam, NaNGradientNamesParameterAndLeavesState) {
  ParamSet p;
  p.add("layer/weight", Tensor::from({1.0, 2.0}));
  auto st = make_adam_state(p, {});
  const Tensor g[] = {Tensor::from({0.1, std::nan("")})};
  try {
    adam_step(p, g, st);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("layer/weight"), std::string::npos);
  }
  EXPECT_EQ(st.step, 0u);
  EXPECT_EQ(p.var(0).value()[0], 1.0);
}

TEST(Ema, SingleStep) {
  ParamSet p = one_param(1.0);
  auto ema = make_ema(std::vector<Tensor>{Tensor::from({0.0})}, 0.999);
  ema_update(ema, p);
  EXPECT_NEAR(ema.shadow[0][0], 0.001, 1e-15);
}

TEST(Ema, GeometricSeries) {
  ParamSet p = one_param(2.0);
  const double d = 0.9;
  auto ema = make_ema(std::vector<Tensor>{Tensor::from({0.0})}, d);
  for (int k = 1; k <= 20; ++k) {
    ema_update(ema, p);
    EXPECT_NEAR(ema.shadow[0][0], 2.0 * (1.0 - std::pow(d, k)), 1e-12);
  }
}

TEST(Ema, FixedPointAndDecayRange) {
  ParamSet p = one_param(0.7);
  auto ema = make_ema(p, 0.99);
  ema_update(ema, p);
  EXPECT_DOUBLE_EQ(ema.shadow[0][0], 0.7);
  EXPECT_THROW(make_ema(p, 1.0), ConfigError);
  EXPECT_THROW(make_ema(p, 0.0), ConfigError);
}

TEST(ParamSet, SetValuesChecksShapes) {
  ParamSet p;
  p.add("w", Tensor({2, 2}));
  std::vector<Tensor> bad{Tensor({2})};
  try {
    p.set_values(bad);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("w"), std::string::npos);
  }
}

}  // namespace
}  // namespace lddgan

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

#include "lddgan/error.hpp"
#include "lddgan/gradcheck.hpp"
#include "lddgan/objectives.hpp"
#include "lddgan/rng.hpp"

namespace lddgan::objectives {
namespace {

Var logits(std::initializer_list<double> v) { return constant(Tensor::from(v)); }

double sigmoid_of(double x) { return 1.0 / (1.0 + std::exp(-x)); }

TEST(DLoss, Values) {
  EXPECT_NEAR(d_loss(logits({0.0}), logits({0.0})).item(), 2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(d_loss(logits({0.0}), logits({0.0})).item(), 1.3863, 1e-4);
  EXPECT_LT(d_loss(logits({60.0}), logits({-60.0})).item(), 1e-25);
  EXPECT_GE(d_loss(logits({-3.0, 2.0}), logits({5.0, 0.1})).item(), 0.0);
}

TEST(DLoss, SymmetryPointGradient) {
  for (double r : {-1.5, 0.0, 0.7}) {
    Var a = Var::parameter(Tensor::from({r}));
    const Var wrt[] = {a};
    const auto g = grad(d_loss(a, a), wrt);
    EXPECT_NEAR(g[0].value()[0], 2.0 * sigmoid_of(r) - 1.0, 1e-14);
  }
}

TEST(DLoss, MonotoneInLogits) {
  const double base = d_loss(logits({0.5}), logits({0.5})).item();
  EXPECT_LT(d_loss(logits({1.0}), logits({0.5})).item(), base);
  EXPECT_LT(d_loss(logits({0.5}), logits({0.0})).item(), base);
}

TEST(DLoss, LiteralFormForComparison) {
  const double r = 0.3, f = -0.4;
  const double expected = -std::log(sigmoid_of(r)) + std::log(sigmoid_of(f));
  EXPECT_NEAR(d_loss(logits({r}), logits({f}), DLossForm::kLiteral).item(), expected, 1e-14);
  EXPECT_EQ(parse_d_loss_form("literal"), DLossForm::kLiteral);
  EXPECT_THROW(parse_d_loss_form("hinge"), ConfigError);
}

TEST(GAdvLoss, Values) {
  EXPECT_NEAR(g_adv_loss(logits({0.0})).item(), std::log(2.0), 1e-15);
  EXPECT_NEAR(g_adv_loss(logits({-2.0})).item(), std::log1p(std::exp(2.0)), 1e-14);
  EXPECT_NEAR(g_adv_loss(logits({-2.0})).item(), 2.1269, 1e-4);
  EXPECT_LT(g_adv_loss(logits({60.0})).item(), 1e-25);
  EXPECT_NEAR(g_adv_loss(logits({1.2})).item(), -std::log(sigmoid_of(1.2)), 1e-14);
}

TEST(LossGradients, FiniteDifferences) {
  RngStream rng(3);
  const Tensor real = uniform_sample(rng, {6, 1}, -3, 3), fake = uniform_sample(rng, {6, 1}, -3, 3);
  auto f = [](const std::vector<Var>& v) { return d_loss(v[0], v[1]) + g_adv_loss(v[1]); };
  EXPECT_TRUE(gradient_check(f, {real, fake}).passed);
  auto r = [](const std::vector<Var>& v) { return rec_loss(v[0], v[1], RecNorm::kL2); };
  EXPECT_TRUE(gradient_check(r, {real, fake}).passed);
}

TEST(RecLoss, Values) {
  EXPECT_EQ(rec_loss(logits({1.0, -1.0}), logits({1.0, -1.0})).item(), 0.0);
  EXPECT_DOUBLE_EQ(rec_loss(logits({1.0, -1.0}), logits({0.0, 0.0})).item(), 1.0);
  EXPECT_DOUBLE_EQ(rec_loss(logits({1.0, -1.0}), logits({0.0, 0.0}), RecNorm::kL2).item(), 1.0);
  EXPECT_THROW(rec_loss(logits({1.0}), logits({1.0, 2.0})), ShapeError);
}

TEST(RecLoss, MetricUpToScale) {
  RngStream rng(5);
  for (int i = 0; i < 100; ++i) {
    const Var a = constant(uniform_sample(rng, {8}, -2, 2));
    const Var b = constant(uniform_sample(rng, {8}, -2, 2));
    const Var c = constant(uniform_sample(rng, {8}, -2, 2));
    const double ab = rec_loss(a, b).item(), ba = rec_loss(b, a).item();
    EXPECT_EQ(ab, ba);
    EXPECT_GT(ab, 0.0);
    EXPECT_LE(ab, rec_loss(a, c).item() + rec_loss(c, b).item() + 1e-15);
  }
}

WeightedLearningConfig wl(double delta, int n, WeightingMode mode = WeightingMode::kWeighted) {
  WeightedLearningConfig c;
  c.delta = delta;
  c.num_epochs = n;
  c.mode = mode;
  return c;
}

TEST(LambdaSchedule, DirectEvaluation) {
  for (double delta : {1.0, 5.0, 10.0}) {
    const int n = 400;
    for (int e : {0, n / 4, n / 2, 3 * n / 4, n}) {
      const double phi = -delta + delta * e / n;
      const double direct = 1.0 - 1.0 / (1.0 + std::exp(-phi));
      EXPECT_NEAR(lambda_schedule(e, wl(delta, n)), direct, 1e-12) << delta << " " << e;
    }
    EXPECT_EQ(lambda_schedule(0, wl(delta, n)), 1.0 / (1.0 + std::exp(-delta)));
    EXPECT_EQ(lambda_schedule(n, wl(delta, n)), 0.5);
  }
}

TEST(LambdaSchedule, Examples) {
  EXPECT_NEAR(lambda_schedule(0, wl(10, 100)), 0.99995, 1e-5);
  EXPECT_NEAR(lambda_schedule(50, wl(10, 100)), 0.99331, 1e-5);
}

TEST(LambdaSchedule, MonotoneAndBounded) {
  const auto c = wl(3.0, 37);
  double prev = 1.0;
  for (int e = 0; e <= 37; ++e) {
    const double l = lambda_schedule(e, c);
    EXPECT_LE(l, prev);
    EXPECT_GE(l, 0.5);
    EXPECT_LE(l, sigmoid_of(3.0));
    prev = l;
  }
  EXPECT_THROW(lambda_schedule(-1, c), IndexError);
  EXPECT_THROW(lambda_schedule(38, c), IndexError);
  EXPECT_THROW(lambda_schedule(0, wl(0.0, 10)), ConfigError);
}

TEST(LambdaSchedule, DoubledSlopeVariantReachesZero) {
  const auto c = wl(20.0, 10, WeightingMode::kWeightedV2);
  EXPECT_EQ(lambda_schedule(5, c), 0.5);
  EXPECT_LT(lambda_schedule(10, c), 1e-8);
}

TEST(EffectiveLambda, PerMode) {
  auto c = wl(10.0, 10, WeightingMode::kLinearFixed);
  c.fixed_lambda = 0.3;
  EXPECT_EQ(effective_lambda(4, c), 0.3);
  c.mode = WeightingMode::kAdversarialOnly;
  EXPECT_EQ(effective_lambda(4, c), 0.0);
  c.mode = WeightingMode::kWeighted;
  EXPECT_EQ(effective_lambda(4, c), lambda_schedule(4, c));
}

TEST(GTotalLoss, Modes) {
  const Var adv = logits({0.5}), rec = logits({0.2});
  EXPECT_EQ(g_total_loss(adv, rec, 0.7, WeightingMode::kAdversarialOnly).node(), adv.node());
  EXPECT_TRUE(bitwise_equal(g_total_loss(adv, rec, 0.0, WeightingMode::kLinearFixed).value(), adv.value()));
  EXPECT_NEAR(g_total_loss(adv, rec, 1.0, WeightingMode::kLinearFixed).item(), 0.7, 1e-15);
  const auto c = wl(10.0, 20);
  const double lam = lambda_schedule(20, c);
  EXPECT_DOUBLE_EQ(g_total_loss(adv, rec, lam, WeightingMode::kWeighted).item(), 0.5 + 0.5 * 0.2);
}

TEST(R1Penalty, LinearCritic) {
  PairCritic critic = [&](const Var& a, const Var& b) {
    return matmul(concat_last({a, b}), constant(Tensor({6, 1}, std::vector<double>{0.5, -1.0, 2.0, 1.5, 0.0, 1.0})));
  };
  RngStream rng(1);
  const Tensor a = gaussian_sample(rng, {4, 3}), b = gaussian_sample(rng, {4, 3});
  const double norm2 = 0.25 + 1.0 + 4.0 + 2.25 + 0.0 + 1.0;
  EXPECT_NEAR(r1_penalty(critic, a, b, 0.2).item(), 0.1 * norm2, 1e-14);
  EXPECT_EQ(r1_penalty(critic, a, b, 0.0).item(), 0.0);
  PairCritic flat = [](const Var& x, const Var&) { return constant(Tensor({x.shape()[0], 1}, 3.0)); };
  EXPECT_EQ(r1_penalty(flat, a, b, 1.0).item(), 0.0);
}

TEST(R1Penalty, DifferentiableInCriticParameters) {
  RngStream rng(2);
  const Tensor a = gaussian_sample(rng, {3, 2}), b = gaussian_sample(rng, {3, 2});
  auto f = [&](const std::vector<Var>& v) {
    PairCritic critic = [&](const Var& x, const Var& y) { return sum(tanh(matmul(concat_last({x, y}), v[0])), {1}, true); };
    return r1_penalty(critic, a, b, 0.5);
  };
  const auto r = gradient_check(f, {gaussian_sample(rng, {4, 3})});
  EXPECT_TRUE(r.passed) << r.max_rel_error;
}

}  // namespace
}  // namespace lddgan::objectives

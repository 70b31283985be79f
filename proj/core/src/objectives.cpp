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

#include "lddgan/objectives.hpp"

#include <cmath>

#include "lddgan/error.hpp"

namespace lddgan::objectives {

WeightingMode parse_weighting_mode(const std::string& s) {
  if (s == "weighted") return WeightingMode::kWeighted;
  if (s == "weighted_v2") return WeightingMode::kWeightedV2;
  if (s == "linear_fixed") return WeightingMode::kLinearFixed;
  if (s == "adversarial_only") return WeightingMode::kAdversarialOnly;
  throw ConfigError("unknown weighting mode '" + s +
                    "' (expected weighted, weighted_v2, linear_fixed or adversarial_only)");
}

std::string to_string(WeightingMode mode) {
  switch (mode) {
    case WeightingMode::kWeighted: return "weighted";
    case WeightingMode::kWeightedV2: return "weighted_v2";
    case WeightingMode::kLinearFixed: return "linear_fixed";
    case WeightingMode::kAdversarialOnly: return "adversarial_only";
  }
  return "weighted";
}

RecNorm parse_rec_norm(const std::string& s) {
  if (s == "l1") return RecNorm::kL1;
  if (s == "l2") return RecNorm::kL2;
  throw ConfigError("unknown reconstruction norm '" + s + "' (expected l1 or l2)");
}

std::string to_string(RecNorm norm) { return norm == RecNorm::kL1 ? "l1" : "l2"; }

DLossForm parse_d_loss_form(const std::string& s) {
  if (s == "softplus") return DLossForm::kSoftplus;
  if (s == "literal") return DLossForm::kLiteral;
  throw ConfigError("unknown discriminator loss form '" + s + "' (expected softplus or literal)");
}

std::string to_string(DLossForm form) { return form == DLossForm::kSoftplus ? "softplus" : "literal"; }

void WeightedLearningConfig::validate() const {
  if (!(delta > 0.0)) throw ConfigError("weighting delta must be positive");
  if (num_epochs < 1) throw ConfigError("num_epochs must be at least 1");
  if (!(fixed_lambda >= 0.0)) throw ConfigError("fixed lambda must be nonnegative");
}

Var d_loss(const Var& real_logit, const Var& fake_logit, DLossForm form) {
  if (form == DLossForm::kLiteral) {
    return mean_all(softplus(-real_logit)) - mean_all(softplus(-fake_logit));
  }
  return mean_all(softplus(-real_logit)) + mean_all(softplus(fake_logit));
}

Var g_adv_loss(const Var& fake_logit) { return mean_all(softplus(-fake_logit)); }

Var rec_loss(const Var& x0, const Var& x0_pred, RecNorm norm) {
  if (x0.shape() != x0_pred.shape()) {
    throw ShapeError("rec_loss: shapes " + shape_str(x0.shape()) + " and " + shape_str(x0_pred.shape()) +
                     " differ");
  }
  const Var d = x0 - x0_pred;
  return norm == RecNorm::kL1 ? mean_all(abs(d)) : mean_all(square(d));
}

double lambda_schedule(int epoch, const WeightedLearningConfig& config) {
  config.validate();
  if (epoch < 0 || epoch > config.num_epochs) {
    throw IndexError("epoch " + std::to_string(epoch) + " outside [0, " +
                     std::to_string(config.num_epochs) + "]");
  }
  const double n = static_cast<double>(config.num_epochs);
  const double e = static_cast<double>(epoch);
  const double remaining = config.mode == WeightingMode::kWeightedV2 ? (n - 2.0 * e) / n : (n - e) / n;
  const double phi = -config.delta * remaining;
  return 1.0 / (1.0 + std::exp(phi));
}

double effective_lambda(int epoch, const WeightedLearningConfig& config) {
  switch (config.mode) {
    case WeightingMode::kWeighted:
    case WeightingMode::kWeightedV2: return lambda_schedule(epoch, config);
    case WeightingMode::kLinearFixed: return config.fixed_lambda;
    case WeightingMode::kAdversarialOnly: return 0.0;
  }
  return 0.0;
}

Var g_total_loss(const Var& adv, const Var& rec, double lambda, WeightingMode mode) {
  if (mode == WeightingMode::kAdversarialOnly) return adv;
  return adv + rec * lambda;
}

Var r1_penalty(const PairCritic& critic, const Tensor& x_prev, const Tensor& x_t, double gamma) {
  if (!(gamma >= 0.0)) throw ConfigError("R1 gamma must be nonnegative");
  if (!x_prev.same_shape(x_t)) throw ShapeError("r1_penalty: pair shapes differ");
  const Var a = Var::parameter(x_prev);
  const Var b = Var::parameter(x_t);
  const Var logits = critic(a, b);
  const std::vector<Var> inputs{a, b};
  const auto grads = grad(sum_all(logits), inputs, /*create_graph=*/true);
  const double n = static_cast<double>(x_prev.dim(0));
  return (sum_all(square(grads[0])) + sum_all(square(grads[1]))) * (0.5 * gamma / n);
}

}  // namespace lddgan::objectives

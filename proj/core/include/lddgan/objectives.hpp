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

#pragma once

#include <functional>
#include <string>

#include "lddgan/autograd.hpp"

namespace lddgan::objectives {

// How the reconstruction term is weighted in the generator objective.
enum class WeightingMode {
  kWeighted,         // sigmoid schedule over epochs
  kWeightedV2,       // same with doubled slope, reaches lambda -> 0
  kLinearFixed,      // constant lambda
  kAdversarialOnly,  // lambda = 0
};

WeightingMode parse_weighting_mode(const std::string& s);
std::string to_string(WeightingMode mode);

struct WeightedLearningConfig {
  double delta = 10.0;
  int num_epochs = 1;
  WeightingMode mode = WeightingMode::kWeighted;
  double fixed_lambda = 1.0;

  void validate() const;
};

enum class RecNorm { kL1, kL2 };
RecNorm parse_rec_norm(const std::string& s);
std::string to_string(RecNorm norm);

enum class DLossForm {
  kSoftplus,  // softplus(-real) + softplus(fake)
  kLiteral,   // -log D(real) + log D(fake), unbounded below; comparison only
};
DLossForm parse_d_loss_form(const std::string& s);
std::string to_string(DLossForm form);

// Discriminator loss averaged over the batch.
Var d_loss(const Var& real_logit, const Var& fake_logit, DLossForm form = DLossForm::kSoftplus);

// Non-saturating generator loss mean(softplus(-fake_logit)) = -log sigmoid(fake).
Var g_adv_loss(const Var& fake_logit);

// Mean absolute (or squared) error between the clean sample and its prediction.
Var rec_loss(const Var& x0, const Var& x0_pred, RecNorm norm = RecNorm::kL1);

// Reconstruction weight at `epoch` in [0, num_epochs]:
//   phi = -delta + delta * epoch / num_epochs,  lambda = 1 - 1 / (1 + exp(-phi)).
// Evaluated as 1 / (1 + exp(phi)) so lambda(0) = sigmoid(delta) and
// lambda(num_epochs) = 0.5 hold exactly. kWeightedV2 uses a doubled slope.
double lambda_schedule(int epoch, const WeightedLearningConfig& config);

// Lambda the training loop applies at `epoch` for the configured mode.
double effective_lambda(int epoch, const WeightedLearningConfig& config);

// adv + lambda * rec; kAdversarialOnly returns adv unchanged.
Var g_total_loss(const Var& adv, const Var& rec, double lambda, WeightingMode mode);

using PairCritic = std::function<Var(const Var& x_prev, const Var& x_t)>;

// (gamma / 2) * E[|grad_{x_prev, x_t} D|^2] on a real pair. The result is
// differentiable with respect to the critic's parameters.
Var r1_penalty(const PairCritic& critic, const Tensor& x_prev, const Tensor& x_t, double gamma);

}  // namespace lddgan::objectives

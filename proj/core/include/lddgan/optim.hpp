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

#include <cstdint>
#include <span>
#include <vector>

#include "lddgan/params.hpp"

namespace lddgan {

// Adaptive-moment hyper-parameters. The low beta1 is the usual GAN setting.
struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double eps = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;
};

OptimizerState make_adam_state(const ParamSet& params, AdamConfig config);

// Bias-corrected Adam update in place. Throws NumericError naming the
// parameter if any gradient is not finite; nothing is modified in that case.
void adam_step(ParamSet& params, std::span<const Tensor> grads, OptimizerState& state);

struct EmaState {
  std::vector<Tensor> shadow;
  double decay = 0.999;
};

// Shadow initialised from the current parameters. Throws ConfigError unless
// 0 < decay < 1.
EmaState make_ema(const ParamSet& params, double decay);
EmaState make_ema(std::vector<Tensor> shadow, double decay);

// shadow <- decay * shadow + (1 - decay) * params, elementwise.
void ema_update(EmaState& ema, const ParamSet& params);

}  // namespace lddgan

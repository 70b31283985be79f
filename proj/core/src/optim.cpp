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

#include "lddgan/optim.hpp"

#include <cmath>

#include "lddgan/error.hpp"

namespace lddgan {

OptimizerState make_adam_state(const ParamSet& params, AdamConfig config) {
  if (!(config.lr > 0) || !(config.beta1 >= 0 && config.beta1 < 1) ||
      !(config.beta2 >= 0 && config.beta2 < 1) || !(config.eps > 0)) {
    throw ConfigError("invalid Adam hyper-parameters");
  }
  OptimizerState s;
  s.config = config;
  for (const Var& p : params.vars()) {
    s.m.emplace_back(p.shape());
    s.v.emplace_back(p.shape());
  }
  return s;
}

void adam_step(ParamSet& params, std::span<const Tensor> grads, OptimizerState& state) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw ShapeError("adam_step: parameter/gradient/state count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params.var(i).shape() || state.m[i].shape() != params.var(i).shape()) {
      throw ShapeError("adam_step: shape mismatch for parameter '" + params.name(i) + "'");
    }
    if (!grads[i].all_finite()) {
      throw NumericError("non-finite gradient for parameter '" + params.name(i) + "'");
    }
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params.var(i).mutable_value().data();
    auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

EmaState make_ema(std::vector<Tensor> shadow, double decay) {
  if (!(decay > 0.0 && decay < 1.0)) {
    throw ConfigError("EMA decay must lie in (0, 1), got " + std::to_string(decay));
  }
  return EmaState{std::move(shadow), decay};
}

EmaState make_ema(const ParamSet& params, double decay) { return make_ema(params.values(), decay); }

void ema_update(EmaState& ema, const ParamSet& params) {
  if (ema.shadow.size() != params.size()) throw ShapeError("ema_update: parameter count mismatch");
  const double d = ema.decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& p = params.var(i).value();
    if (p.shape() != ema.shadow[i].shape()) {
      throw ShapeError("ema_update: shape mismatch for parameter '" + params.name(i) + "'");
    }
    auto s = ema.shadow[i].data();
    auto x = p.data();
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = d * s[j] + (1.0 - d) * x[j];
  }
}

}  // namespace lddgan

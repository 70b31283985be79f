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

#include <span>
#include <string>
#include <vector>

#include "lddgan/autograd.hpp"

namespace lddgan::diffusion {

enum class ScheduleKind { kLinear, kGeometric };

ScheduleKind parse_schedule_kind(const std::string& s);
std::string to_string(ScheduleKind kind);

// How build_schedule treats a terminal alpha_bar that is not near zero.
enum class TerminalCheck {
  kStrict,   // error at >= 1e-2, warning in [1e-4, 1e-2)
  kInspect,  // warning only; used to dump arbitrary schedules
};

// Few-step variance schedule with precomputed posterior coefficients. All
// per-step arrays are indexed by t in [0, T]; entry 0 is the data end of the
// chain (alpha_bar[0] = 1) and is unused for the per-step quantities.
struct NoiseSchedule {
  int T = 0;
  ScheduleKind kind = ScheduleKind::kLinear;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;
  std::vector<double> coef_x0;
  std::vector<double> coef_xt;
  std::vector<double> posterior_var;
  std::vector<std::string> warnings;

  // Variance reported for the degenerate t = 1 posterior.
  static constexpr double kVarianceFloor = 1e-6;

  void check_t(int t, int lowest = 1) const;
};

NoiseSchedule build_schedule(int T, double beta_min, double beta_max,
                             ScheduleKind kind = ScheduleKind::kLinear,
                             TerminalCheck check = TerminalCheck::kStrict);

// Schedule from explicit per-step betas. The terminal check only warns.
NoiseSchedule schedule_from_betas(std::vector<double> betas);

// Largest-step beta that drives alpha_bar[T] to `target` for the given
// beta_min and spacing (bisection).
double default_beta_max(int T, double beta_min, ScheduleKind kind, double target = 5e-5);

// Forward marginal: sqrt(alpha_bar[t]) x0 + sqrt(1 - alpha_bar[t]) noise.
// t = 0 is accepted and returns x0.
Tensor q_sample(const Tensor& x0, int t, const Tensor& noise, const NoiseSchedule& s);

// Batched marginal with one timestep per leading-axis item; t = 0 items pass through.
Var q_sample(const Var& x0, std::span<const int> t, const Tensor& noise, const NoiseSchedule& s);

// One forward transition q(x_t | x_{t-1}) for per-item t.
Var forward_step(const Var& x_prev, std::span<const int> t, const Tensor& noise,
                 const NoiseSchedule& s);

struct PosteriorParams {
  Tensor mean;
  double var = 0.0;
};

// q(x_{t-1} | x_t, x0). For t = 1 the mean is x0 and the variance is the floor.
PosteriorParams posterior_params(const Tensor& x0, const Tensor& x_t, int t, const NoiseSchedule& s);

// mean + sqrt(var) noise, differentiable in both x0 and x_t.
Var posterior_sample(const Var& x0, const Var& x_t, int t, const Tensor& noise,
                     const NoiseSchedule& s);

// Batched posterior draw with per-item t. Items with t = 1 return x0 exactly
// (no noise), matching the terminal step of the sampler.
Var posterior_sample(const Var& x0, const Var& x_t, std::span<const int> t, const Tensor& noise,
                     const NoiseSchedule& s);

// Per-item coefficient column shaped [N, 1, ..., 1] to broadcast against `like`.
Tensor per_item(std::span<const double> values, const Shape& like);

}  // namespace lddgan::diffusion

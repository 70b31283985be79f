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

#include "lddgan/diffusion.hpp"

#include <cmath>

#include "lddgan/error.hpp"

namespace lddgan::diffusion {
namespace {

constexpr double kStrictReject = 1e-2;
constexpr double kNearIsotropic = 1e-4;

std::vector<double> spaced_betas(int T, double beta_min, double beta_max, ScheduleKind kind) {
  std::vector<double> betas(static_cast<std::size_t>(T));
  if (T == 1) {
    betas[0] = beta_max;
    return betas;
  }
  for (int i = 0; i < T; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(T - 1);
    betas[static_cast<std::size_t>(i)] = kind == ScheduleKind::kLinear
                                             ? beta_min + (beta_max - beta_min) * u
                                             : beta_min * std::pow(beta_max / beta_min, u);
  }
  return betas;
}

NoiseSchedule assemble(const std::vector<double>& betas) {
  NoiseSchedule s;
  s.T = static_cast<int>(betas.size());
  const std::size_t n = betas.size() + 1;
  s.beta.assign(n, 0.0);
  s.alpha.assign(n, 1.0);
  s.alpha_bar.assign(n, 1.0);
  s.coef_x0.assign(n, 0.0);
  s.coef_xt.assign(n, 0.0);
  s.posterior_var.assign(n, 0.0);
  for (std::size_t t = 1; t < n; ++t) {
    const double b = betas[t - 1];
    if (!(b > 0.0 && b < 1.0)) throw ConfigError("beta values must lie in (0, 1)");
    s.beta[t] = b;
    s.alpha[t] = 1.0 - b;
    s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
  }
  // Gaussian conjugacy of q(x_{t-1} | x0) and q(x_t | x_{t-1}).
  s.coef_x0[1] = 1.0;
  s.coef_xt[1] = 0.0;
  s.posterior_var[1] = NoiseSchedule::kVarianceFloor;
  for (std::size_t t = 2; t < n; ++t) {
    const double one_minus_ab = 1.0 - s.alpha_bar[t];
    const double one_minus_ab_prev = 1.0 - s.alpha_bar[t - 1];
    s.coef_x0[t] = std::sqrt(s.alpha_bar[t - 1]) * s.beta[t] / one_minus_ab;
    s.coef_xt[t] = std::sqrt(s.alpha[t]) * one_minus_ab_prev / one_minus_ab;
    s.posterior_var[t] = s.beta[t] * one_minus_ab_prev / one_minus_ab;
  }
  return s;
}

void terminal_check(NoiseSchedule& s, TerminalCheck check) {
  const double terminal = s.alpha_bar[static_cast<std::size_t>(s.T)];
  if (terminal >= kStrictReject && check == TerminalCheck::kStrict) {
    throw ConfigError("alpha_bar[T] = " + std::to_string(terminal) +
                      " >= 1e-2: terminal state is far from isotropic noise");
  }
  if (terminal >= kNearIsotropic) {
    s.warnings.push_back("alpha_bar[T] = " + std::to_string(terminal) +
                         " is not below 1e-4; x_T is not quite isotropic");
  }
}

void coefficient_column(std::vector<double>& storage, std::span<const int> t,
                                 std::size_t n, const std::vector<double>& table,
                                 const NoiseSchedule& s, auto transform, int lowest = 1) {
  if (t.size() != n && t.size() != 1) {
    throw ShapeError("expected " + std::to_string(n) + " timesteps, got " + std::to_string(t.size()));
  }
  storage.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int ti = t.size() == 1 ? t[0] : t[i];
    s.check_t(ti, lowest);
    storage[i] = transform(table[static_cast<std::size_t>(ti)], ti);
  }
}

}  // namespace

ScheduleKind parse_schedule_kind(const std::string& s) {
  if (s == "linear") return ScheduleKind::kLinear;
  if (s == "geometric") return ScheduleKind::kGeometric;
  throw ConfigError("unknown schedule kind '" + s + "' (expected linear or geometric)");
}

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::kLinear ? "linear" : "geometric";
}

void NoiseSchedule::check_t(int t, int lowest) const {
  if (t < lowest || t > T) {
    throw IndexError("timestep " + std::to_string(t) + " outside [" + std::to_string(lowest) + ", " +
                     std::to_string(T) + "]");
  }
}

NoiseSchedule build_schedule(int T, double beta_min, double beta_max, ScheduleKind kind,
                             TerminalCheck check) {
  if (T < 1 || T > 64) throw ConfigError("T must lie in [1, 64], got " + std::to_string(T));
  if (!(beta_min > 0.0) || !(beta_min <= beta_max) || !(beta_max < 1.0)) {
    throw ConfigError("need 0 < beta_min <= beta_max < 1, got beta_min = " + std::to_string(beta_min) +
                      ", beta_max = " + std::to_string(beta_max));
  }
  NoiseSchedule s = assemble(spaced_betas(T, beta_min, beta_max, kind));
  s.kind = kind;
  terminal_check(s, check);
  return s;
}

NoiseSchedule schedule_from_betas(std::vector<double> betas) {
  if (betas.empty() || betas.size() > 64) throw ConfigError("need between 1 and 64 betas");
  NoiseSchedule s = assemble(betas);
  terminal_check(s, TerminalCheck::kInspect);
  return s;
}

double default_beta_max(int T, double beta_min, ScheduleKind kind, double target) {
  if (T < 1 || !(beta_min > 0 && beta_min < 1) || !(target > 0 && target < 1)) {
    throw ConfigError("default_beta_max: invalid arguments");
  }
  auto terminal = [&](double bmax) {
    double ab = 1.0;
    for (double b : spaced_betas(T, beta_min, bmax, kind)) ab *= 1.0 - b;
    return ab;
  };
  double lo = beta_min, hi = 1.0 - 1e-12;
  if (terminal(lo) <= target) return lo;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (terminal(mid) > target ? lo : hi) = mid;
  }
  return hi;
}

Tensor q_sample(const Tensor& x0, int t, const Tensor& noise, const NoiseSchedule& s) {
  s.check_t(t, 0);
  if (!x0.same_shape(noise)) throw ShapeError("q_sample: noise shape does not match x0");
  const double a = std::sqrt(s.alpha_bar[static_cast<std::size_t>(t)]);
  const double b = std::sqrt(1.0 - s.alpha_bar[static_cast<std::size_t>(t)]);
  Tensor out(x0.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0[i] + b * noise[i];
  return out;
}

Tensor per_item(std::span<const double> values, const Shape& like) {
  Shape s(like.size(), 1);
  s[0] = values.size();
  return Tensor(s, std::vector<double>(values.begin(), values.end()));
}

Var q_sample(const Var& x0, std::span<const int> t, const Tensor& noise, const NoiseSchedule& s) {
  if (x0.shape() != noise.shape()) throw ShapeError("q_sample: noise shape does not match x0");
  const std::size_t n = x0.shape().at(0);
  std::vector<double> a, b;
  coefficient_column(a, t, n, s.alpha_bar, s, [](double ab, int) { return std::sqrt(ab); }, 0);
  coefficient_column(b, t, n, s.alpha_bar, s, [](double ab, int) { return std::sqrt(1.0 - ab); }, 0);
  return x0 * constant(per_item(a, x0.shape())) +
         constant(noise) * constant(per_item(b, x0.shape()));
}

Var forward_step(const Var& x_prev, std::span<const int> t, const Tensor& noise,
                 const NoiseSchedule& s) {
  if (x_prev.shape() != noise.shape()) throw ShapeError("forward_step: noise shape mismatch");
  const std::size_t n = x_prev.shape().at(0);
  std::vector<double> a, b;
  coefficient_column(a, t, n, s.alpha, s, [](double al, int) { return std::sqrt(al); });
  coefficient_column(b, t, n, s.beta, s, [](double be, int) { return std::sqrt(be); });
  return x_prev * constant(per_item(a, x_prev.shape())) + constant(noise) * constant(per_item(b, noise.shape()));
}

PosteriorParams posterior_params(const Tensor& x0, const Tensor& x_t, int t, const NoiseSchedule& s) {
  s.check_t(t);
  if (!x0.same_shape(x_t)) throw ShapeError("posterior_params: x0 and x_t shapes differ");
  const auto ti = static_cast<std::size_t>(t);
  PosteriorParams p{Tensor(x0.shape()), s.posterior_var[ti]};
  for (std::size_t i = 0; i < x0.size(); ++i) p.mean[i] = s.coef_x0[ti] * x0[i] + s.coef_xt[ti] * x_t[i];
  return p;
}

Var posterior_sample(const Var& x0, const Var& x_t, int t, const Tensor& noise,
                     const NoiseSchedule& s) {
  s.check_t(t);
  if (x0.shape() != x_t.shape() || x0.shape() != noise.shape()) {
    throw ShapeError("posterior_sample: shape mismatch");
  }
  const auto ti = static_cast<std::size_t>(t);
  return x0 * s.coef_x0[ti] + x_t * s.coef_xt[ti] + constant(noise) * std::sqrt(s.posterior_var[ti]);
}

Var posterior_sample(const Var& x0, const Var& x_t, std::span<const int> t, const Tensor& noise,
                     const NoiseSchedule& s) {
  if (x0.shape() != x_t.shape() || x0.shape() != noise.shape()) {
    throw ShapeError("posterior_sample: shape mismatch");
  }
  const std::size_t n = x0.shape().at(0);
  std::vector<double> c0, ct, sd;
  coefficient_column(c0, t, n, s.coef_x0, s, [](double c, int) { return c; });
  coefficient_column(ct, t, n, s.coef_xt, s, [](double c, int) { return c; });
  coefficient_column(sd, t, n, s.posterior_var, s,
                     [](double v, int ti) { return ti == 1 ? 0.0 : std::sqrt(v); });
  const Shape& like = x0.shape();
  return x0 * constant(per_item(c0, like)) + x_t * constant(per_item(ct, like)) +
         constant(noise) * constant(per_item(sd, like));
}

}  // namespace lddgan::diffusion

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

#include "lddgan/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lddgan/error.hpp"
#include "lddgan/rng.hpp"

namespace lddgan {
namespace {

// Evaluated with recording on: functions may take inner gradients.
double evaluate(const ScalarFn& f, const std::vector<Tensor>& inputs) {
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor& t : inputs) vars.emplace_back(t);
  const Var out = f(vars);
  if (out.size() != 1) throw ShapeError("gradient_check: function must return a scalar");
  return out.item();
}

std::vector<std::vector<std::size_t>> pick_elements(const std::vector<Tensor>& inputs,
                                                    const GradCheckOptions& o) {
  RngStream rng = RngStream(o.seed).derive("gradcheck-elements");
  std::vector<std::vector<std::size_t>> picks;
  for (const Tensor& t : inputs) {
    std::vector<std::size_t> idx(t.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (o.max_elements_per_input && idx.size() > o.max_elements_per_input) {
      for (std::size_t i = 0; i < o.max_elements_per_input; ++i) {
        const std::size_t j = i + rng.uniform_int(idx.size() - i);
        std::swap(idx[i], idx[j]);
      }
      idx.resize(o.max_elements_per_input);
      std::sort(idx.begin(), idx.end());
    }
    picks.push_back(std::move(idx));
  }
  return picks;
}

}  // namespace

GradCheckReport gradient_check(const ScalarFn& f, std::vector<Tensor> inputs,
                               const GradCheckOptions& options) {
  for (const Tensor& t : inputs) {
    if (!t.all_finite()) throw NumericError("gradient_check: non-finite input");
  }
  const double h = options.step;
  const auto picks = pick_elements(inputs, options);
  RngStream nudge = RngStream(options.seed).derive("gradcheck-nudge");

  GradCheckReport report;
  std::vector<std::vector<double>> numeric(inputs.size());
  for (int round = 0;; ++round) {
    const double f0 = evaluate(f, inputs);
    const double kink_threshold = 1e-8 * std::max(1.0, std::abs(f0));
    bool kink = false;
    std::vector<std::pair<std::size_t, std::size_t>> kinks;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      numeric[i].assign(picks[i].size(), 0.0);
      for (std::size_t k = 0; k < picks[i].size(); ++k) {
        const std::size_t j = picks[i][k];
        const double x = inputs[i][j];
        inputs[i][j] = x + h;
        const double fp = evaluate(f, inputs);
        inputs[i][j] = x - h;
        const double fm = evaluate(f, inputs);
        inputs[i][j] = x;
        numeric[i][k] = (fp - fm) / (2.0 * h);
        if (std::abs(fp - 2.0 * f0 + fm) > kink_threshold) {
          kink = true;
          kinks.emplace_back(i, j);
        }
      }
    }
    if (!kink || round >= options.max_perturb_rounds) {
      report.nondifferentiable_detected = report.nondifferentiable_detected || kink;
      break;
    }
    report.nondifferentiable_detected = true;
    for (auto [i, j] : kinks) {
      const double sign = nudge.uniform() < 0.5 ? -1.0 : 1.0;
      inputs[i][j] += sign * 1e-3 * std::max(1.0, std::abs(inputs[i][j]));
      ++report.perturbed_elements;
    }
  }

  std::vector<Var> vars;
  for (const Tensor& t : inputs) vars.push_back(Var::parameter(t));
  const Var out = f(vars);
  const double fscale = std::max(1.0, std::abs(out.item()));
  const auto analytic = grad(out, vars);

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto a = analytic[i].value().data();
    for (std::size_t k = 0; k < picks[i].size(); ++k) {
      const std::size_t j = picks[i][k];
      const double an = a[j];
      const double nu = numeric[i][k];
      const double denom = std::max({std::abs(an), std::abs(nu), options.abs_floor * fscale});
      const double rel = std::abs(an - nu) / denom;
      ++report.checked_elements;
      if (rel > worst || !std::isfinite(rel)) {
        worst = std::isfinite(rel) ? rel : INFINITY;
        report.worst = "input " + std::to_string(i) + ", element " + std::to_string(j);
      }
    }
  }
  report.max_rel_error = worst;
  report.passed = worst < options.tolerance;
  report.final_inputs = std::move(inputs);
  return report;
}

GradCheckReport parameter_gradient_check(const std::function<Var()>& loss, ParamSet& params,
                                         const GradCheckOptions& options) {
  std::vector<Tensor> values = params.values();
  const auto picks = pick_elements(values, options);
  auto eval = [&]() {
    const Var out = loss();
    if (out.size() != 1) throw ShapeError("parameter_gradient_check: loss must be a scalar");
    return out.item();
  };
  const double h = options.step;
  const double f0 = eval();
  const double kink_threshold = 1e-8 * std::max(1.0, std::abs(f0));

  GradCheckReport report;
  std::vector<std::vector<double>> numeric(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    Tensor& p = params.var(i).mutable_value();
    for (std::size_t j : picks[i]) {
      const double x = p[j];
      p[j] = x + h;
      const double fp = eval();
      p[j] = x - h;
      const double fm = eval();
      p[j] = x;
      numeric[i].push_back((fp - fm) / (2.0 * h));
      if (std::abs(fp - 2.0 * f0 + fm) > kink_threshold) report.nondifferentiable_detected = true;
    }
  }

  const Var out = loss();
  const double fscale = std::max(1.0, std::abs(out.item()));
  const auto analytic = grad(out, params.vars());
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto a = analytic[i].value().data();
    for (std::size_t k = 0; k < picks[i].size(); ++k) {
      const double an = a[picks[i][k]];
      const double nu = numeric[i][k];
      const double denom = std::max({std::abs(an), std::abs(nu), options.abs_floor * fscale});
      const double rel = std::abs(an - nu) / denom;
      ++report.checked_elements;
      if (rel > worst || !std::isfinite(rel)) {
        worst = std::isfinite(rel) ? rel : INFINITY;
        report.worst = params.name(i) + ", element " + std::to_string(picks[i][k]);
      }
    }
  }
  params.set_values(values);
  report.max_rel_error = worst;
  report.passed = worst < options.tolerance;
  return report;
}

}  // namespace lddgan

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
#include <functional>
#include <string>
#include <vector>

#include "lddgan/autograd.hpp"
#include "lddgan/params.hpp"

namespace lddgan {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor (scaled by max(1, |f|)) so vanishing entries are
  // compared absolutely.
  double abs_floor = 1e-6;
  // 0 checks every element; otherwise a seeded subset per input.
  std::size_t max_elements_per_input = 0;
  std::uint64_t seed = 0;
  // Attempts at moving off a detected kink before giving up.
  int max_perturb_rounds = 3;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  bool passed = false;
  bool nondifferentiable_detected = false;
  std::size_t perturbed_elements = 0;
  std::size_t checked_elements = 0;
  std::string worst;  // "input i, element j" of the largest error
  std::vector<Tensor> final_inputs;  // inputs after any kink perturbation
};

using ScalarFn = std::function<Var(const std::vector<Var>&)>;

// Compares reverse-mode gradients of a scalar function with central finite
// differences. Points where a one-sided slope jump is detected (e.g. |x| at
// 0) are flagged and nudged before comparison.
GradCheckReport gradient_check(const ScalarFn& f, std::vector<Tensor> inputs,
                               const GradCheckOptions& options = {});

// Same comparison for the parameters of a model: `loss` is rebuilt from the
// current parameter values for every evaluation. Kinks are reported but not
// nudged, and the parameters are restored before returning.
GradCheckReport parameter_gradient_check(const std::function<Var()>& loss, ParamSet& params,
                                         const GradCheckOptions& options = {});

}  // namespace lddgan

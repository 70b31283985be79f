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

#include "lddgan/config.hpp"
#include "lddgan/metrics.hpp"

namespace lddgan::ablation {

struct ArmResult {
  objectives::WeightingMode mode;
  std::uint64_t seed = 0;
  metrics::MetricReport report;
  double train_seconds = 0.0;
};

struct AblationResult {
  std::vector<ArmResult> runs;
  // Median report per arm, in the order of `arms`.
  std::vector<std::pair<objectives::WeightingMode, metrics::MetricReport>> medians;
};

inline const std::vector<objectives::WeightingMode> kDefaultArms{
    objectives::WeightingMode::kAdversarialOnly, objectives::WeightingMode::kLinearFixed,
    objectives::WeightingMode::kWeighted};
inline const std::vector<std::uint64_t> kDefaultSeeds{1, 2, 3};

// Trains every (arm, seed) pair on the configured gaussians25 set and
// evaluates EMA samples against the held-out points.
AblationResult run_ablation(const config::RunConfig& base,
                            const std::vector<objectives::WeightingMode>& arms = kDefaultArms,
                            const std::vector<std::uint64_t>& seeds = kDefaultSeeds,
                            const std::function<void(const ArmResult&)>& on_run = {});

// One trained-and-evaluated run; also used by the acceptance suite.
ArmResult run_arm(const config::RunConfig& base, objectives::WeightingMode mode, std::uint64_t seed);

double median(std::vector<double> v);
metrics::MetricReport median_report(const std::vector<metrics::MetricReport>& reports);

// arm,seed,<report columns>; median rows use seed "median".
std::string format_csv(const AblationResult& result);

}  // namespace lddgan::ablation

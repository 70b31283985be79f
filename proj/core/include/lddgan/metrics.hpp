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

#include <string>
#include <vector>

#include <Eigen/Core>

#include "lddgan/tensor.hpp"

namespace lddgan::metrics {

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Rows of `samples` (leading axis) flattened to vectors. Unbiased covariance.
// Throws ConfigError with fewer than dim + 1 samples.
GaussianStats fit_gaussian_stats(const Tensor& samples);

// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}), evaluated through the
// symmetric product S_a^{1/2} S_b S_a^{1/2} with negative eigenvalues clamped.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  std::vector<std::string> warnings;
};

// k-NN manifold estimate: precision is the fraction of fake points inside
// some real point's k-th-neighbour ball, recall the converse.
PrecisionRecall improved_precision_recall(const Tensor& real, const Tensor& fake, std::size_t k = 3);

// Distance from each row to its k-th nearest other row.
std::vector<double> knn_radii(const Tensor& points, std::size_t k);

struct ModeCoverage {
  int modes_covered = 0;
  double high_quality_fraction = 0.0;
  std::vector<std::size_t> counts;  // high-quality samples per mode
};

// 5x5 grid of modes at spacing 2 centred on the origin, standard deviation
// sigma. A sample is high quality when within 4 sigma of its nearest mode; a
// mode is covered with at least max(1, n / 500) high-quality samples.
ModeCoverage mode_coverage_25g(const Tensor& samples, double sigma = 0.05);

struct MetricReport {
  double frechet = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  int modes = -1;  // -1 when mode coverage does not apply
  double hq_fraction = -1.0;
  int nfe = 0;
  double seconds = 0.0;
  std::size_t n_samples = 0;
};

inline constexpr const char* kReportHeader = "frechet,precision,recall,modes,hq_fraction,nfe,seconds,n_samples";
std::string format_report_row(const MetricReport& r);

// Everything but the timing fields. Mode coverage is filled for 2-D data.
MetricReport evaluate(const Tensor& real, const Tensor& fake, std::size_t k = 3);

}  // namespace lddgan::metrics

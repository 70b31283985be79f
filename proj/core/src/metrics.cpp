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

#include "lddgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "lddgan/error.hpp"

namespace lddgan::metrics {
namespace {

std::size_t row_width(const Tensor& t) {
  if (t.rank() == 0) throw ShapeError("expected a set of vectors, got a scalar");
  return t.size() / t.dim(0);
}

double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  const Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

// Squared k-NN radii, so that ball tests compare squared distances exactly.
std::vector<double> knn_radii_sq(const Tensor& points, std::size_t k) {
  const std::size_t n = points.dim(0), d = row_width(points);
  if (n < k + 1) {
    throw ConfigError("k-NN radius needs at least " + std::to_string(k + 1) + " points, got " + std::to_string(n));
  }
  const double* p = points.data().data();
  std::vector<double> radii(n), dist(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist[c++] = sq_dist(p + i * d, p + j * d, d);
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    radii[i] = dist[k - 1];
  }
  return radii;
}

double coverage(const Tensor& manifold, const std::vector<double>& radii_sq, const Tensor& queries) {
  const std::size_t n = manifold.dim(0), m = queries.dim(0), d = row_width(manifold);
  const double* p = manifold.data().data();
  const double* q = queries.data().data();
  std::size_t inside = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (sq_dist(q + i * d, p + j * d, d) <= radii_sq[j]) {
        ++inside;
        break;
      }
    }
  }
  return static_cast<double>(inside) / static_cast<double>(m);
}

}  // namespace

GaussianStats fit_gaussian_stats(const Tensor& samples) {
  const std::size_t n = samples.dim(0), d = row_width(samples);
  if (n < d + 1) {
    throw ConfigError("Gaussian fit in " + std::to_string(d) + " dimensions needs at least " +
                      std::to_string(d + 1) + " samples, got " + std::to_string(n));
  }
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> x(samples.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  GaussianStats s;
  s.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centred = x.rowwise() - s.mean.transpose();
  s.cov = (centred.transpose() * centred) / static_cast<double>(n - 1);
  s.cov = 0.5 * (s.cov + s.cov.transpose());
  return s;
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows() || a.cov.rows() != a.mean.size()) {
    throw ShapeError("Frechet distance dimension mismatch: " + std::to_string(a.mean.size()) + " vs " +
                     std::to_string(b.mean.size()));
  }
  const Eigen::MatrixXd ra = symmetric_sqrt(a.cov);
  Eigen::MatrixXd m = ra * b.cov * ra;
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  const double tr_sqrt = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * tr_sqrt;
  return std::max(d, 0.0);
}

std::vector<double> knn_radii(const Tensor& points, std::size_t k) {
  auto r = knn_radii_sq(points, k);
  for (auto& v : r) v = std::sqrt(v);
  return r;
}

PrecisionRecall improved_precision_recall(const Tensor& real, const Tensor& fake, std::size_t k) {
  if (k == 0) throw ConfigError("k must be positive");
  if (row_width(real) != row_width(fake)) throw ShapeError("real and fake feature widths differ");
  PrecisionRecall out;
  const auto real_r = knn_radii_sq(real, k);
  const auto fake_r = knn_radii_sq(fake, k);
  const auto all_zero = [](const std::vector<double>& r) {
    return std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; });
  };
  if (all_zero(real_r)) out.warnings.push_back("real set is degenerate: every k-NN radius is 0");
  if (all_zero(fake_r)) out.warnings.push_back("fake set is degenerate: every k-NN radius is 0");
  out.precision = coverage(real, real_r, fake);
  out.recall = coverage(fake, fake_r, real);
  return out;
}

ModeCoverage mode_coverage_25g(const Tensor& samples, double sigma) {
  if (row_width(samples) != 2) throw ShapeError("mode coverage expects 2-D points, got " + shape_str(samples.shape()));
  const std::size_t n = samples.dim(0);
  ModeCoverage out;
  out.counts.assign(25, 0);
  const double limit = 4.0 * sigma;
  std::size_t hq = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = samples[2 * i], y = samples[2 * i + 1];
    // Nearest grid point of {-4, -2, 0, 2, 4}^2.
    const auto nearest = [](double v) { return std::clamp(std::round(v / 2.0), -2.0, 2.0); };
    const double gx = nearest(x), gy = nearest(y);
    const double dx = x - 2.0 * gx, dy = y - 2.0 * gy;
    if (std::sqrt(dx * dx + dy * dy) <= limit) {
      ++hq;
      ++out.counts[static_cast<std::size_t>((gx + 2) * 5 + (gy + 2))];
    }
  }
  const double need = std::max(1.0, static_cast<double>(n) / 500.0);
  for (std::size_t c : out.counts) {
    if (static_cast<double>(c) >= need) ++out.modes_covered;
  }
  out.high_quality_fraction = n ? static_cast<double>(hq) / static_cast<double>(n) : 0.0;
  return out;
}

std::string format_report_row(const MetricReport& r) {
  return fmt::format("{},{},{},{},{},{},{},{}", r.frechet, r.precision, r.recall, r.modes, r.hq_fraction, r.nfe,
                     r.seconds, r.n_samples);
}

MetricReport evaluate(const Tensor& real, const Tensor& fake, std::size_t k) {
  MetricReport r;
  r.frechet = frechet_distance(fit_gaussian_stats(real), fit_gaussian_stats(fake));
  const auto pr = improved_precision_recall(real, fake, k);
  r.precision = pr.precision;
  r.recall = pr.recall;
  if (row_width(fake) == 2) {
    const auto mc = mode_coverage_25g(fake);
    r.modes = mc.modes_covered;
    r.hq_fraction = mc.high_quality_fraction;
  }
  r.n_samples = fake.dim(0);
  return r;
}

}  // namespace lddgan::metrics

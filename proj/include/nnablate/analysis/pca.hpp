#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "nnablate/analysis/matrix.hpp"
#include "nnablate/core/error.hpp"
#include "nnablate/core/random.hpp"

namespace nnablate::analysis {

struct PcaResult {
  std::vector<double> mean;
  std::array<std::vector<double>, 2> components;  // unit vectors, or zero when the variance is nil
  std::array<double, 2> eigenvalues{};           // of the sample covariance
  std::array<double, 2> explained_variance_ratio{};
  double total_variance = 0.0;
  Matrix projections;  // n x 2

  std::array<double, 2> project(std::span<const double> x) const {
    std::array<double, 2> p{};
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t j = 0; j < x.size(); ++j) p[c] += (x[j] - mean[j]) * components[c][j];
    return p;
  }
};

struct PcaOptions {
  std::size_t max_iterations = 200000;
  double tolerance = 1e-13;  // on the eigen-residual, relative to the covariance trace
};

inline Matrix sample_covariance(const Matrix& points, std::vector<double>& mean) {
  const std::size_t n = points.rows(), d = points.cols();
  mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += points(i, j);
  for (double& m : mean) m /= static_cast<double>(n);
  // Second pass removes the rounding left in the first (identical rows centre to exactly 0).
  std::vector<double> residual(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) residual[j] += points(i, j) - mean[j];
  for (std::size_t j = 0; j < d; ++j) mean[j] += residual[j] / static_cast<double>(n);
  Matrix cov(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = points.row(i);
    for (std::size_t a = 0; a < d; ++a) {
      const double da = row[a] - mean[a];
      for (std::size_t b = a; b < d; ++b) cov(a, b) += da * (row[b] - mean[b]);
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      cov(a, b) /= denom;
      cov(b, a) = cov(a, b);
    }
  return cov;
}

namespace detail {

inline void normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  if (s > 0.0)
    for (double& x : v) x /= s;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline std::vector<double> multiply(const Matrix& m, const std::vector<double>& v) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double s = 0.0;
    for (std::size_t c = 0; c < v.size(); ++c) s += row[c] * v[c];
    out[r] = s;
  }
  return out;
}

// Dominant eigenpair of a symmetric PSD matrix by power iteration, keeping
// the iterate orthogonal to `against`.
inline double power_iteration(const Matrix& m, const std::vector<std::vector<double>>& against, double scale,
                              const PcaOptions& opt, std::vector<double>& v) {
  const std::size_t d = m.rows();
  Rng rng(0x504341);  // fixed start vector
  v.assign(d, 0.0);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  auto orthogonalize = [&](std::vector<double>& w) {
    for (const auto& u : against) {
      const double p = dot(w, u);
      for (std::size_t i = 0; i < d; ++i) w[i] -= p * u[i];
    }
  };
  orthogonalize(v);
  normalize(v);
  double lambda = 0.0;
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    auto w = multiply(m, v);
    orthogonalize(w);
    lambda = dot(v, w);
    double residual = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double r = w[i] - lambda * v[i];
      residual += r * r;
    }
    double norm = std::sqrt(dot(w, w));
    if (norm == 0.0) {
      v.assign(d, 0.0);
      return 0.0;
    }
    for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / norm;
    if (std::sqrt(residual) <= opt.tolerance * scale) break;
  }
  orthogonalize(v);
  normalize(v);
  return dot(v, multiply(m, v));
}

}  // namespace detail

// Top two principal axes of the sample covariance by power iteration with
// deflation. Each axis is signed so its largest-magnitude coordinate is
// positive. Axes whose eigenvalue is negligible (relative 1e-12 of the
// trace) are returned as zero vectors with zero projections.
inline PcaResult pca_2d(const Matrix& points, const PcaOptions& opt = {}) {
  if (points.rows() < 2) throw PreconditionError("pca_2d: needs at least two points");
  PcaResult r;
  Matrix cov = sample_covariance(points, r.mean);
  const std::size_t d = cov.rows();
  for (std::size_t i = 0; i < d; ++i) r.total_variance += cov(i, i);

  std::vector<std::vector<double>> found;
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<double> v;
    double lambda = 0.0;
    if (r.total_variance > 0.0 && c < d) lambda = detail::power_iteration(cov, found, r.total_variance, opt, v);
    if (!(lambda > 1e-12 * r.total_variance)) {
      v.assign(d, 0.0);
      lambda = 0.0;
    } else {
      std::size_t arg = 0;
      for (std::size_t i = 1; i < d; ++i)
        if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
      if (v[arg] < 0.0)
        for (double& x : v) x = -x;
      // deflate
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) cov(a, b) -= lambda * v[a] * v[b];
      found.push_back(v);
    }
    r.components[c] = std::move(v);
    r.eigenvalues[c] = lambda;
    r.explained_variance_ratio[c] = r.total_variance > 0.0 ? lambda / r.total_variance : 0.0;
  }

  r.projections = Matrix(points.rows(), 2);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto p = r.project(points.row(i));
    r.projections(i, 0) = p[0];
    r.projections(i, 1) = p[1];
  }
  return r;
}

}  // namespace nnablate::analysis

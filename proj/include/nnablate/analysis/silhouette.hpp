#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "nnablate/analysis/matrix.hpp"
#include "nnablate/core/error.hpp"

namespace nnablate::analysis {

// Per-point silhouette (b - a) / max(a, b) with Euclidean distances.
// Points in singleton clusters score 0, as does a point with a = b = 0.
inline std::vector<double> silhouette_samples(const Matrix& points, const std::vector<std::size_t>& labels) {
  const std::size_t n = points.rows();
  if (labels.size() != n) throw PreconditionError("silhouette: label count differs from point count");
  std::size_t k = 0;
  for (auto l : labels) k = std::max(k, l + 1);
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : labels) ++sizes[l];
  if (std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }) < 2)
    throw PreconditionError("silhouette: needs at least two non-empty clusters");

  // sums(i, c): total distance from point i to the members of cluster c.
  Matrix sums(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::sqrt(squared_distance(points.row(i), points.row(j)));
      sums(i, labels[j]) += d;
      sums(j, labels[i]) += d;
    }

  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = labels[i];
    if (sizes[own] < 2) continue;
    const double a = sums(i, own) / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own && sizes[c] > 0) b = std::min(b, sums(i, c) / static_cast<double>(sizes[c]));
    const double m = std::max(a, b);
    s[i] = m > 0.0 ? (b - a) / m : 0.0;
  }
  return s;
}

inline double silhouette(const Matrix& points, const std::vector<std::size_t>& labels) {
  const auto s = silhouette_samples(points, labels);
  double total = 0.0;
  for (double v : s) total += v;
  return total / static_cast<double>(s.size());
}

}  // namespace nnablate::analysis

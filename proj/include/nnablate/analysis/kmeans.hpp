#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nnablate/analysis/matrix.hpp"
#include "nnablate/core/error.hpp"
#include "nnablate/core/random.hpp"

namespace nnablate::analysis {

struct KMeansResult {
  std::vector<std::size_t> labels;
  Matrix centroids;
  double inertia = 0.0;
  std::vector<double> inertia_history;  // after each centroid update
  std::size_t iterations = 0;
  std::size_t repairs = 0;  // empty clusters refilled
};

inline constexpr std::uint64_t kKMeansStream = 0x4b4d45414e53;  // "KMEANS"

// Nearest centroid, ties to the lowest index.
inline std::size_t nearest_centroid(std::span<const double> point, const Matrix& centroids, double* dist = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(point, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

inline double inertia_of(const Matrix& points, const std::vector<std::size_t>& labels, const Matrix& centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) s += squared_distance(points.row(i), centroids.row(labels[i]));
  return s;
}

// k-means++ seeding: first centre uniform, then proportional to squared
// distance from the nearest chosen centre.
inline Matrix kmeanspp_init(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(n);
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double v : d2) total += v;
      if (total > 0.0) {
        const double u = rng.uniform() * total;
        double cum = 0.0;
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (d2[i] <= 0.0) continue;
          cum += d2[i];
          if (u < cum) {
            pick = i;
            break;
          }
        }
        if (pick == n)  // rounding at the top end
          for (std::size_t i = n; i-- > 0;)
            if (d2[i] > 0.0) {
              pick = i;
              break;
            }
      } else {
        pick = rng.below(n);
      }
    }
    std::copy(points.row(pick).begin(), points.row(pick).end(), centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points.row(i), centroids.row(c)));
  }
  return centroids;
}

namespace detail {

inline std::vector<std::size_t> assign(const Matrix& points, const Matrix& centroids) {
  std::vector<std::size_t> labels(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) labels[i] = nearest_centroid(points.row(i), centroids);
  return labels;
}

inline Matrix means(const Matrix& points, const std::vector<std::size_t>& labels, const Matrix& previous) {
  Matrix sums(previous.rows(), points.cols());
  std::vector<std::size_t> counts(previous.rows(), 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto row = sums.row(labels[i]);
    const auto p = points.row(i);
    for (std::size_t j = 0; j < p.size(); ++j) row[j] += p[j];
    ++counts[labels[i]];
  }
  for (std::size_t c = 0; c < sums.rows(); ++c) {
    if (counts[c] == 0) {
      std::copy(previous.row(c).begin(), previous.row(c).end(), sums.row(c).begin());
      continue;
    }
    for (double& v : sums.row(c)) v /= static_cast<double>(counts[c]);
  }
  return sums;
}

// Refills each empty cluster (ascending) with the point farthest from its
// centroid among clusters that can spare one; ties to the lowest index.
inline std::size_t repair_empty(const Matrix& points, std::vector<std::size_t>& labels, Matrix& centroids) {
  std::vector<std::size_t> counts(centroids.rows(), 0);
  for (auto l : labels) ++counts[l];
  std::size_t repairs = 0;
  for (std::size_t e = 0; e < centroids.rows(); ++e) {
    if (counts[e] != 0) continue;
    std::size_t far = points.rows();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
      if (counts[labels[i]] < 2) continue;
      const double d = squared_distance(points.row(i), centroids.row(labels[i]));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == points.rows()) break;
    --counts[labels[far]];
    labels[far] = e;
    ++counts[e];
    std::copy(points.row(far).begin(), points.row(far).end(), centroids.row(e).begin());
    ++repairs;
  }
  return repairs;
}

}  // namespace detail

// One Lloyd run from the given centroids.
inline KMeansResult lloyd(const Matrix& points, Matrix centroids, std::size_t max_iterations = 300) {
  KMeansResult r;
  std::vector<std::size_t> labels = detail::assign(points, centroids);
  std::vector<std::size_t> previous_repaired;
  bool converged = false;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const std::size_t repairs = detail::repair_empty(points, labels, centroids);
    r.repairs += repairs;
    // A repair that the next assignment undoes again (coincident points)
    // is a fixed point of its own.
    if (repairs > 0 && labels == previous_repaired) {
      converged = true;
      break;
    }
    if (repairs > 0) previous_repaired = labels;
    centroids = detail::means(points, labels, centroids);
    r.inertia_history.push_back(inertia_of(points, labels, centroids));
    r.iterations = it + 1;
    auto next = detail::assign(points, centroids);
    if (next == labels) {
      converged = true;
      break;
    }
    labels = std::move(next);
  }
  if (!converged) labels = detail::assign(points, centroids);
  r.inertia = inertia_of(points, labels, centroids);
  r.labels = std::move(labels);
  r.centroids = std::move(centroids);
  return r;
}

// Best of `restarts` k-means++ seeded Lloyd runs by inertia; the earliest
// restart wins ties.
inline KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts = 20,
                           std::size_t max_iterations = 300) {
  if (k == 0) throw PreconditionError("kmeans: k must be positive");
  if (k > points.rows())
    throw PreconditionError("kmeans: k = " + std::to_string(k) + " exceeds the " + std::to_string(points.rows()) +
                            " points");
  if (restarts == 0) throw PreconditionError("kmeans: need at least one restart");
  KMeansResult best;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, kKMeansStream, r));
    auto result = lloyd(points, kmeanspp_init(points, k, rng), max_iterations);
    if (r == 0 || result.inertia < best.inertia) best = std::move(result);
  }
  return best;
}

}  // namespace nnablate::analysis

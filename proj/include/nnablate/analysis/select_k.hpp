#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nnablate/analysis/kmeans.hpp"
#include "nnablate/analysis/silhouette.hpp"
#include "nnablate/core/parallel.hpp"
#include "nnablate/core/random.hpp"

namespace nnablate::analysis {

struct SweepEntry {
  std::size_t k = 0;
  double score = 0.0;
};

struct KSelection {
  std::size_t chosen_k = 0;
  std::vector<SweepEntry> sweep;
  double median = 0.0;
  double iqr = 0.0;
  // (best score - median) / IQR; +infinity with iqr_degenerate set when IQR is 0.
  double iqr_multiple = 0.0;
  bool iqr_degenerate = false;
  // The best score is at least 1.5 IQR above the median.
  bool is_outlier = false;
  KMeansResult clustering;  // for chosen_k
};

inline constexpr double kOutlierIqrMultiple = 1.5;
inline constexpr std::uint64_t kSelectStream = 0x53454c4543544b;  // "SELECTK"

// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw PreconditionError("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

struct SelectKOptions {
  std::size_t k_min = 2;
  std::size_t k_max = 12;
  std::size_t restarts = 20;
  std::size_t max_iterations = 300;
  std::size_t threads = default_thread_count();
};

// Clusters for every k in [k_min, k_max] (each k with its own derived seed),
// scores each by mean silhouette and picks the best; the smallest k wins ties.
inline KSelection select_k(const Matrix& points, std::uint64_t seed, const SelectKOptions& opt = {}) {
  if (opt.k_min < 2) throw PreconditionError("select_k: k_min must be at least 2");
  if (opt.k_max < opt.k_min) throw PreconditionError("select_k: k_max is below k_min");
  if (opt.k_max > points.rows())
    throw PreconditionError("select_k: k_max = " + std::to_string(opt.k_max) + " exceeds the " +
                            std::to_string(points.rows()) + " points");
  const std::size_t count = opt.k_max - opt.k_min + 1;
  std::vector<KMeansResult> runs(count);
  std::vector<double> scores(count);
  parallel_for(
      count,
      [&](std::size_t i) {
        const std::size_t k = opt.k_min + i;
        runs[i] = kmeans(points, k, derive_seed(seed, kSelectStream, k), opt.restarts, opt.max_iterations);
        scores[i] = silhouette(points, runs[i].labels);
      },
      opt.threads);

  KSelection sel;
  std::size_t best = 0;
  for (std::size_t i = 0; i < count; ++i) {
    sel.sweep.push_back({opt.k_min + i, scores[i]});
    if (scores[i] > scores[best]) best = i;
  }
  sel.chosen_k = opt.k_min + best;
  sel.clustering = std::move(runs[best]);
  sel.median = quantile(scores, 0.5);
  sel.iqr = quantile(scores, 0.75) - quantile(scores, 0.25);
  if (sel.iqr > 0.0) {
    sel.iqr_multiple = (scores[best] - sel.median) / sel.iqr;
    sel.is_outlier = sel.iqr_multiple >= kOutlierIqrMultiple;
  } else {
    sel.iqr_multiple = std::numeric_limits<double>::infinity();
    sel.iqr_degenerate = true;
    sel.is_outlier = false;
  }
  return sel;
}

}  // namespace nnablate::analysis

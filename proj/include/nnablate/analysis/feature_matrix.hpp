#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "nnablate/ablation/ablate.hpp"
#include "nnablate/analysis/matrix.hpp"
#include "nnablate/core/error.hpp"

namespace nnablate::analysis {

struct RowInfo {
  std::size_t trial = 0;
  std::size_t group = 0;
  friend bool operator==(const RowInfo&, const RowInfo&) = default;
};

struct ColumnInfo {
  std::size_t image = 0;
  std::size_t component = 1;  // index into nn::kComponentNames; lateral or rotational
  friend bool operator==(const ColumnInfo&, const ColumnInfo&) = default;
};

// One row per (trial, group) ablation; columns alternate lateral and
// rotational deltas image by image. The longitudinal component is left out.
struct FeatureMatrix {
  Matrix points;
  std::vector<RowInfo> rows;
  std::vector<ColumnInfo> columns;
};

inline constexpr std::size_t kFeatureComponents[] = {1, 2};

inline FeatureMatrix build_feature_matrix(const std::vector<ablation::AblationDelta>& deltas) {
  if (deltas.empty()) throw PreconditionError("build_feature_matrix: no deltas");
  const std::size_t n_images = deltas.front().image_count();
  std::map<std::size_t, std::size_t> groups_per_trial;
  for (const auto& d : deltas) {
    if (d.image_count() != n_images)
      throw PreconditionError("build_feature_matrix: trial " + std::to_string(d.trial_id) +
                              " was evaluated on a different probe set");
    ++groups_per_trial[d.trial_id];
  }
  const std::size_t n_groups = groups_per_trial.begin()->second;
  for (const auto& [trial, count] : groups_per_trial)
    if (count != n_groups)
      throw PreconditionError("build_feature_matrix: trial " + std::to_string(trial) + " has " +
                              std::to_string(count) + " groups, expected " + std::to_string(n_groups));

  FeatureMatrix fm;
  fm.points = Matrix(deltas.size(), 2 * n_images);
  for (std::size_t i = 0; i < n_images; ++i)
    for (std::size_t c : kFeatureComponents) fm.columns.push_back({i, c});
  for (std::size_t r = 0; r < deltas.size(); ++r) {
    const auto& d = deltas[r];
    fm.rows.push_back({d.trial_id, d.group_id});
    for (std::size_t i = 0; i < n_images; ++i) {
      const auto delta = d.delta(i);
      fm.points(r, 2 * i) = delta.lateral;
      fm.points(r, 2 * i + 1) = delta.rotational;
    }
  }
  return fm;
}

inline FeatureMatrix build_feature_matrix(const std::vector<std::vector<ablation::AblationDelta>>& per_trial) {
  std::vector<ablation::AblationDelta> flat;
  for (const auto& trial : per_trial) flat.insert(flat.end(), trial.begin(), trial.end());
  return build_feature_matrix(flat);
}

inline constexpr double kConstantColumnEpsilon = 1e-12;

// Within each trial's rows, standardizes every column to mean 0 and sample
// standard deviation 1. Columns whose deviation is below 1e-12 become 0.
inline FeatureMatrix normalize_per_trial(const FeatureMatrix& m) {
  std::map<std::size_t, std::vector<std::size_t>> blocks;
  for (std::size_t r = 0; r < m.rows.size(); ++r) blocks[m.rows[r].trial].push_back(r);
  FeatureMatrix out = m;
  for (const auto& [trial, rows] : blocks) {
    if (rows.size() < 2)
      throw PreconditionError("normalize_per_trial: trial " + std::to_string(trial) + " has fewer than 2 rows");
    const double n = static_cast<double>(rows.size());
    for (std::size_t c = 0; c < m.points.cols(); ++c) {
      double mean = 0.0;
      for (auto r : rows) mean += m.points(r, c);
      mean /= n;
      double ss = 0.0;
      for (auto r : rows) {
        const double d = m.points(r, c) - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / (n - 1.0));
      for (auto r : rows) out.points(r, c) = sd < kConstantColumnEpsilon ? 0.0 : (m.points(r, c) - mean) / sd;
    }
  }
  return out;
}

}  // namespace nnablate::analysis

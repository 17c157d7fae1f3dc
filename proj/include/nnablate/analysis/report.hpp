#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nnablate/ablation/ablate.hpp"
#include "nnablate/analysis/feature_matrix.hpp"
#include "nnablate/analysis/kmeans.hpp"
#include "nnablate/analysis/pca.hpp"
#include "nnablate/analysis/select_k.hpp"
#include "nnablate/analysis/silhouette.hpp"
#include "nnablate/analysis/summary.hpp"
#include "nnablate/core/parallel.hpp"
#include "nnablate/core/text.hpp"

namespace nnablate::analysis {

struct AnalysisOptions {
  std::uint64_t seed = 1;
  std::size_t k_min = 2;
  std::size_t k_max = 12;
  std::size_t restarts = 20;
  std::size_t max_iterations = 300;
  std::size_t threads = default_thread_count();
};

struct ClusterReport {
  std::size_t n_trials = 0;
  std::size_t n_groups = 0;
  std::size_t n_images = 0;
  std::size_t k_min = 0;
  std::size_t k_max = 0;  // after clamping to the number of rows minus one

  FeatureMatrix raw_features;
  FeatureMatrix features;  // per-trial standardized; what K-means and PCA see

  // Set when the standardized matrix has no spread at all (e.g. every delta
  // is zero). Clustering is then skipped: one cluster, zero scores.
  bool no_structure = false;

  KSelection selection;
  std::vector<std::size_t> labels;
  Matrix centroids;
  double inertia = 0.0;
  double silhouette_normalized = 0.0;
  double silhouette_raw = 0.0;

  PcaResult pca;
  Matrix centroids_2d;
  ClusterSummary summary;

  std::size_t chosen_k() const { return selection.chosen_k; }
};

inline bool has_spread(const Matrix& m) {
  for (std::size_t r = 1; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (m(r, c) != m(0, c)) return true;
  return false;
}

// deltas ordered by (trial, group), as compute_deltas and the CSV reader give them.
inline ClusterReport analyze(const std::vector<ablation::AblationDelta>& deltas, const AnalysisOptions& opt = {}) {
  ClusterReport r;
  r.raw_features = build_feature_matrix(deltas);
  r.features = normalize_per_trial(r.raw_features);
  std::set<std::size_t> trials;
  for (const auto& row : r.raw_features.rows) trials.insert(row.trial);
  r.n_trials = trials.size();
  r.n_groups = deltas.size() / r.n_trials;
  r.n_images = deltas.front().image_count();
  const Matrix& x = r.features.points;
  const std::size_t n = x.rows();
  r.k_min = opt.k_min;
  r.k_max = std::min(opt.k_max, n - 1);
  if (r.k_max < r.k_min)
    throw PreconditionError("analyze: " + std::to_string(n) + " rows are too few for k >= " + std::to_string(opt.k_min));

  if (!has_spread(x)) {
    r.no_structure = true;
    for (std::size_t k = r.k_min; k <= r.k_max; ++k) r.selection.sweep.push_back({k, 0.0});
    r.selection.chosen_k = 1;
    r.selection.iqr_multiple = std::numeric_limits<double>::infinity();
    r.selection.iqr_degenerate = true;
    r.labels.assign(n, 0);
    r.centroids = Matrix(1, x.cols());
    std::copy(x.row(0).begin(), x.row(0).end(), r.centroids.row(0).begin());
  } else {
    SelectKOptions sk{r.k_min, r.k_max, opt.restarts, opt.max_iterations, opt.threads};
    r.selection = select_k(x, opt.seed, sk);
    r.labels = r.selection.clustering.labels;
    r.centroids = r.selection.clustering.centroids;
    r.inertia = r.selection.clustering.inertia;
    r.silhouette_normalized = silhouette(x, r.labels);
    r.silhouette_raw = silhouette(r.raw_features.points, r.labels);
  }

  r.pca = pca_2d(x);
  r.centroids_2d = Matrix(r.centroids.rows(), 2);
  for (std::size_t c = 0; c < r.centroids.rows(); ++c) {
    const auto p = r.pca.project(r.centroids.row(c));
    r.centroids_2d(c, 0) = p[0];
    r.centroids_2d(c, 1) = p[1];
  }
  r.summary = cluster_summary(r.labels, std::max<std::size_t>(1, r.selection.chosen_k), deltas);
  return r;
}

// ---- bundle ----------------------------------------------------------------

inline nlohmann::json report_summary_json(const ClusterReport& r) {
  using nlohmann::json;
  json j;
  j["format"] = "nnablate-report";
  j["version"] = 1;
  j["n_trials"] = r.n_trials;
  j["n_groups"] = r.n_groups;
  j["n_images"] = r.n_images;
  j["n_rows"] = r.features.points.rows();
  j["n_features"] = r.features.points.cols();
  j["k_range"] = {r.k_min, r.k_max};
  j["no_structure"] = r.no_structure;
  j["chosen_k"] = r.selection.chosen_k;
  j["sweep"] = json::array();
  for (const auto& e : r.selection.sweep) j["sweep"].push_back({{"k", e.k}, {"silhouette", e.score}});
  j["sweep_median"] = r.selection.median;
  j["sweep_iqr"] = r.selection.iqr;
  j["iqr_multiple"] = r.selection.iqr_degenerate ? json(nullptr) : json(r.selection.iqr_multiple);
  j["iqr_degenerate"] = r.selection.iqr_degenerate;
  j["iqr_outlier"] = r.selection.is_outlier;
  j["silhouette"] = {{"normalized", r.silhouette_normalized}, {"raw", r.silhouette_raw}};
  j["inertia"] = r.inertia;
  j["explained_variance"] = {r.pca.explained_variance_ratio[0], r.pca.explained_variance_ratio[1]};
  j["coverage"] = json::array();
  for (const auto& c : r.summary.clusters)
    j["coverage"].push_back({{"cluster", c.cluster},
                             {"members", c.members},
                             {"trials_covered", c.trials.size()},
                             {"of_trials", r.summary.n_trials}});
  j["lateral_sign_consistency"] = {{"overall", r.summary.lateral_sign_consistency}, {"per_cluster", json::array()}};
  for (const auto& c : r.summary.clusters)
    j["lateral_sign_consistency"]["per_cluster"].push_back(c.lateral_sign_consistency);
  return j;
}

inline std::string feature_column_name(const ColumnInfo& c) {
  return "img" + std::to_string(c.image) + "_" + std::string(nn::kComponentNames[c.component]);
}

inline void write_report_bundle(const ClusterReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "summary.json", report_summary_json(r).dump(2) + "\n");

  std::string sweep = "k,silhouette\n";
  for (const auto& e : r.selection.sweep) sweep += std::to_string(e.k) + "," + format_double(e.score) + "\n";
  write_file(dir / "sweep.csv", sweep);

  std::string assign = "row,trial,group,cluster,pc1,pc2\n";
  for (std::size_t i = 0; i < r.labels.size(); ++i)
    assign += std::to_string(i) + "," + std::to_string(r.features.rows[i].trial) + "," +
              std::to_string(r.features.rows[i].group) + "," + std::to_string(r.labels[i]) + "," +
              format_double(r.pca.projections(i, 0)) + "," + format_double(r.pca.projections(i, 1)) + "\n";
  write_file(dir / "assignments.csv", assign);

  std::string header;
  for (const auto& c : r.features.columns) header += "," + feature_column_name(c);

  std::string features = "trial,group" + header + "\n";
  for (std::size_t i = 0; i < r.features.points.rows(); ++i) {
    features += std::to_string(r.features.rows[i].trial) + "," + std::to_string(r.features.rows[i].group);
    for (double v : r.features.points.row(i)) features += "," + format_double(v);
    features += "\n";
  }
  write_file(dir / "features.csv", features);

  std::string centroids = "cluster" + header + "\n";
  for (std::size_t c = 0; c < r.centroids.rows(); ++c) {
    centroids += std::to_string(c);
    for (double v : r.centroids.row(c)) centroids += "," + format_double(v);
    centroids += "\n";
  }
  write_file(dir / "centroids.csv", centroids);

  std::string c2 = "cluster,pc1,pc2\n";
  for (std::size_t c = 0; c < r.centroids_2d.rows(); ++c)
    c2 += std::to_string(c) + "," + format_double(r.centroids_2d(c, 0)) + "," + format_double(r.centroids_2d(c, 1)) + "\n";
  write_file(dir / "centroids_2d.csv", c2);

  std::string pcs = "component,eigenvalue,explained_variance_ratio" + header + "\n";
  for (std::size_t c = 0; c < 2; ++c) {
    pcs += "pc" + std::to_string(c + 1) + "," + format_double(r.pca.eigenvalues[c]) + "," +
           format_double(r.pca.explained_variance_ratio[c]);
    for (double v : r.pca.components[c]) pcs += "," + format_double(v);
    pcs += "\n";
  }
  write_file(dir / "pca_components.csv", pcs);

  std::string clusters =
      "cluster,members,trials_covered,n_trials,mean_longitudinal,mean_lateral,mean_rotational,lateral_sign_consistency\n";
  for (const auto& c : r.summary.clusters)
    clusters += std::to_string(c.cluster) + "," + std::to_string(c.members) + "," + std::to_string(c.trials.size()) +
                "," + std::to_string(r.summary.n_trials) + "," + format_double(c.mean_delta.longitudinal) + "," +
                format_double(c.mean_delta.lateral) + "," + format_double(c.mean_delta.rotational) + "," +
                format_double(c.lateral_sign_consistency) + "\n";
  write_file(dir / "clusters.csv", clusters);

  std::string coverage = "cluster,trials_covered,n_trials,trials,statement\n";
  for (const auto& c : r.summary.clusters) {
    std::string list;
    for (auto t : c.trials) list += (list.empty() ? "" : " ") + std::to_string(t);
    coverage += std::to_string(c.cluster) + "," + std::to_string(c.trials.size()) + "," +
                std::to_string(r.summary.n_trials) + "," + list + ",groups from " + std::to_string(c.trials.size()) +
                " out of the " + std::to_string(r.summary.n_trials) + " trials\n";
  }
  write_file(dir / "coverage.csv", coverage);
}

inline const std::vector<std::string>& report_bundle_files() {
  static const std::vector<std::string> files = {"summary.json",      "sweep.csv",          "assignments.csv",
                                                 "features.csv",      "centroids.csv",      "centroids_2d.csv",
                                                 "pca_components.csv", "clusters.csv",      "coverage.csv"};
  return files;
}

}  // namespace nnablate::analysis

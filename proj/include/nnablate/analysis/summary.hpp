#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nnablate/ablation/ablate.hpp"
#include "nnablate/core/error.hpp"

namespace nnablate::analysis {

struct ClusterStats {
  std::size_t cluster = 0;
  std::size_t members = 0;
  std::vector<std::size_t> trials;  // distinct trials represented, ascending
  nn::Action mean_delta;            // member deltas averaged over images, then over members
  // Share of members whose image-averaged lateral delta has the same sign as
  // the cluster mean.
  double lateral_sign_consistency = 0.0;
};

struct ClusterSummary {
  std::size_t n_trials = 0;
  std::vector<ClusterStats> clusters;
  double lateral_sign_consistency = 0.0;  // member-weighted over clusters
};

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// `raw` rows line up with `labels`: labels[i] belongs to raw[i].
inline ClusterSummary cluster_summary(const std::vector<std::size_t>& labels, std::size_t k,
                                      const std::vector<ablation::AblationDelta>& raw) {
  if (labels.size() != raw.size()) throw PreconditionError("cluster_summary: labels and deltas differ in length");
  std::set<std::size_t> all_trials;
  for (const auto& d : raw) all_trials.insert(d.trial_id);

  ClusterSummary s;
  s.n_trials = all_trials.size();
  s.clusters.resize(k);
  std::vector<std::vector<nn::Action>> member_means(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= k) throw PreconditionError("cluster_summary: label out of range");
    member_means[labels[i]].push_back(raw[i].mean_delta());
    s.clusters[labels[i]].trials.push_back(raw[i].trial_id);
  }
  std::size_t consistent_total = 0, member_total = 0;
  for (std::size_t c = 0; c < k; ++c) {
    auto& st = s.clusters[c];
    st.cluster = c;
    st.members = member_means[c].size();
    std::sort(st.trials.begin(), st.trials.end());
    st.trials.erase(std::unique(st.trials.begin(), st.trials.end()), st.trials.end());
    if (st.members == 0) continue;
    for (const auto& m : member_means[c])
      for (std::size_t j = 0; j < 3; ++j) st.mean_delta[j] += m[j];
    for (std::size_t j = 0; j < 3; ++j) st.mean_delta[j] /= static_cast<double>(st.members);
    const int cluster_sign = sign_of(st.mean_delta.lateral);
    std::size_t consistent = 0;
    for (const auto& m : member_means[c]) consistent += sign_of(m.lateral) == cluster_sign;
    st.lateral_sign_consistency = static_cast<double>(consistent) / static_cast<double>(st.members);
    consistent_total += consistent;
    member_total += st.members;
  }
  s.lateral_sign_consistency =
      member_total ? static_cast<double>(consistent_total) / static_cast<double>(member_total) : 0.0;
  return s;
}

// Adjusted Rand index between two labelings of the same points.
inline double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw PreconditionError("adjusted_rand_index: labelings differ in length");
  const std::size_t n = a.size();
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, v] : table) index += pairs(v);
  for (const auto& [key, v] : rows) sum_rows += pairs(v);
  for (const auto& [key, v] : cols) sum_cols += pairs(v);
  const double total = pairs(static_cast<double>(n));
  const double expected = total > 0.0 ? sum_rows * sum_cols / total : 0.0;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace nnablate::analysis

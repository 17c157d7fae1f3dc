#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "nnablate/core/error.hpp"
#include "nnablate/core/random.hpp"
#include "nnablate/nn/network.hpp"

namespace nnablate::ablation {

// Disjoint neuron groups of one Dense trunk layer. Groups from
// partition_layer are contiguous and ordered by start index.
struct GroupPartition {
  std::size_t layer_index = 0;
  std::size_t layer_width = 0;
  std::vector<std::vector<std::size_t>> groups;

  std::size_t size() const { return groups.size(); }

  friend bool operator==(const GroupPartition&, const GroupPartition&) = default;
};

inline const nn::Dense& dense_at(const nn::Network& net, std::size_t layer_index) {
  if (layer_index >= net.trunk.size())
    throw PreconditionError("layer " + std::to_string(layer_index) + " does not exist");
  const auto* dense = std::get_if<nn::Dense>(&net.trunk[layer_index]);
  if (!dense) throw PreconditionError("layer " + std::to_string(layer_index) + " is not a dense layer");
  return *dense;
}

// The last Dense layer of the trunk, i.e. the one feeding the output heads
// (the 200-unit layer of the reference architecture).
inline std::size_t default_ablation_layer(const nn::Network& net) {
  const auto dense = nn::dense_layer_indices(net);
  if (dense.empty()) throw PreconditionError("network has no dense trunk layer");
  return dense.back();
}

// Equal contiguous slices; a remainder goes one neuron each to the leading groups.
inline GroupPartition partition_layer(const nn::Network& net, std::size_t layer_index, std::size_t n_groups) {
  const std::size_t width = dense_at(net, layer_index).out_features();
  if (n_groups == 0) throw PreconditionError("partition_layer: need at least one group");
  if (n_groups > width)
    throw PreconditionError("partition_layer: " + std::to_string(n_groups) + " groups exceed layer width " +
                            std::to_string(width));
  GroupPartition p{layer_index, width, {}};
  const std::size_t base = width / n_groups, extra = width % n_groups;
  std::size_t start = 0;
  for (std::size_t g = 0; g < n_groups; ++g) {
    const std::size_t len = base + (g < extra ? 1 : 0);
    std::vector<std::size_t> group(len);
    std::iota(group.begin(), group.end(), start);
    p.groups.push_back(std::move(group));
    start += len;
  }
  return p;
}

// Same group sizes as partition_layer, but neurons are assigned by a seeded
// permutation instead of by position.
inline GroupPartition partition_layer_random(const nn::Network& net, std::size_t layer_index, std::size_t n_groups,
                                             std::uint64_t seed) {
  GroupPartition p = partition_layer(net, layer_index, n_groups);
  std::vector<std::size_t> perm(p.layer_width);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0x47524f5550));  // "GROUP"
  rng.shuffle(perm.begin(), perm.end());
  std::size_t k = 0;
  for (auto& group : p.groups) {
    for (auto& n : group) n = perm[k++];
    std::sort(group.begin(), group.end());
  }
  return p;
}

// Every neuron appears in exactly one group.
inline bool is_exact_cover(const GroupPartition& p) {
  std::vector<int> seen(p.layer_width, 0);
  for (const auto& g : p.groups)
    for (auto n : g) {
      if (n >= p.layer_width || seen[n]++) return false;
    }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

}  // namespace nnablate::ablation

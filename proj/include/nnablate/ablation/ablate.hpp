#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nnablate/ablation/partition.hpp"
#include "nnablate/core/error.hpp"
#include "nnablate/core/parallel.hpp"
#include "nnablate/nn/forward.hpp"
#include "nnablate/nn/network.hpp"
#include "nnablate/trial/probe_set.hpp"

namespace nnablate::ablation {

using nn::Action;

// Per-image outputs of one network with one group ablated.
struct AblationDelta {
  std::size_t trial_id = 0;
  std::size_t group_id = 0;
  std::vector<Action> baseline;
  std::vector<Action> ablated;

  std::size_t image_count() const { return baseline.size(); }
  Action delta(std::size_t image) const { return ablated[image] - baseline[image]; }

  // Delta averaged over all images.
  Action mean_delta() const {
    Action m;
    for (std::size_t i = 0; i < baseline.size(); ++i) {
      const Action d = delta(i);
      for (std::size_t c = 0; c < 3; ++c) m[c] += d[c];
    }
    if (!baseline.empty())
      for (std::size_t c = 0; c < 3; ++c) m[c] /= static_cast<double>(baseline.size());
    return m;
  }
};

inline void check_group(const GroupPartition& p, std::size_t group_id) {
  if (group_id >= p.groups.size())
    throw PreconditionError("group " + std::to_string(group_id) + " out of range (partition has " +
                            std::to_string(p.groups.size()) + " groups)");
}

// Returns a copy with the group's incoming weight rows and biases zeroed in
// the target layer, and its outgoing weight columns zeroed in the next
// Dense layer (or in the three heads if the target is the last one). The
// layers between target and consumer must be elementwise.
inline nn::Network ablate_group(const nn::Network& net, const GroupPartition& p, std::size_t group_id) {
  check_group(p, group_id);
  nn::Network out = net;
  auto& target = std::get<nn::Dense>(out.trunk.at(p.layer_index));
  if (target.out_features() != p.layer_width) throw PreconditionError("ablate_group: partition does not fit layer");
  const auto& group = p.groups[group_id];
  for (auto n : group) {
    for (std::size_t i = 0; i < target.in_features(); ++i) target.weight(n, i) = 0.0;
    target.bias[n] = 0.0;
  }

  auto zero_columns = [&](nn::Dense& consumer) {
    for (std::size_t o = 0; o < consumer.out_features(); ++o)
      for (auto n : group) consumer.weight(o, n) = 0.0;
  };
  std::size_t i = p.layer_index + 1;
  for (; i < out.trunk.size(); ++i) {
    if (auto* dense = std::get_if<nn::Dense>(&out.trunk[i])) {
      zero_columns(*dense);
      return out;
    }
    if (!nn::is_elementwise(out.trunk[i]))
      throw PreconditionError("ablate_group: layer " + std::to_string(i) + " between target and consumer is not elementwise");
  }
  for (auto& head : out.heads) zero_columns(head);
  return out;
}

inline nn::ActivationMask group_mask(const GroupPartition& p, std::size_t group_id) {
  check_group(p, group_id);
  return nn::ActivationMask{p.layer_index, p.groups[group_id]};
}

// FNV-1a over the bit patterns of every parameter in the target layer that
// does not belong to `excluded` (rows of other neurons, their biases, and the
// consumer's columns for other neurons).
inline std::uint64_t non_group_checksum(const nn::Network& net, const GroupPartition& p, std::size_t excluded) {
  std::vector<char> in_group(p.layer_width, 0);
  for (auto n : p.groups[excluded]) in_group[n] = 1;
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  const auto& target = dense_at(net, p.layer_index);
  for (std::size_t n = 0; n < p.layer_width; ++n) {
    if (in_group[n]) continue;
    for (std::size_t i = 0; i < target.in_features(); ++i) mix(target.weight(n, i));
    mix(target.bias[n]);
  }
  auto mix_consumer = [&](const nn::Dense& consumer) {
    for (std::size_t o = 0; o < consumer.out_features(); ++o)
      for (std::size_t n = 0; n < p.layer_width; ++n)
        if (!in_group[n]) mix(consumer.weight(o, n));
  };
  for (std::size_t i = p.layer_index + 1; i < net.trunk.size(); ++i)
    if (const auto* dense = std::get_if<nn::Dense>(&net.trunk[i])) {
      mix_consumer(*dense);
      return h;
    }
  for (const auto& head : net.heads) mix_consumer(head);
  return h;
}

// Eval-mode outputs for every probe image, in probe order.
inline std::vector<Action> compute_baseline(const nn::Network& net, const trial::ProbeSet& probe) {
  std::vector<Action> out;
  out.reserve(probe.size());
  for (const auto& img : probe.images) out.push_back(nn::forward(net, img.pixels));
  return out;
}

// One AblationDelta per group. Each group is ablated on its own copy of the
// network; before evaluating, the copy is checked to differ from the source
// only in that group's parameters.
inline std::vector<AblationDelta> compute_deltas(const nn::Network& net, const trial::ProbeSet& probe,
                                                 const GroupPartition& p, std::size_t trial_id = 0,
                                                 std::size_t threads = default_thread_count()) {
  const auto baseline = compute_baseline(net, probe);
  std::vector<AblationDelta> deltas(p.size());
  parallel_for(
      p.size(),
      [&](std::size_t g) {
        const nn::Network ablated = ablate_group(net, p, g);
        if (non_group_checksum(ablated, p, g) != non_group_checksum(net, p, g))
          throw Error("compute_deltas: ablating group " + std::to_string(g) + " touched other groups");
        AblationDelta d;
        d.trial_id = trial_id;
        d.group_id = g;
        d.baseline = baseline;
        d.ablated = compute_baseline(ablated, probe);
        deltas[g] = std::move(d);
      },
      threads);
  return deltas;
}

}  // namespace nnablate::ablation

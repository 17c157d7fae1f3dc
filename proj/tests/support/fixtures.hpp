#pragma once

// Small random networks and images shared by several test files.

#include <cstdint>

#include "nnablate/core/random.hpp"
#include "nnablate/nn/network.hpp"

namespace fixture {

using nnablate::Rng;
using nnablate::Tensor;
namespace nn = nnablate::nn;

// A random but shape-valid architecture with 1 or 2 conv stages and 1 or 2
// dense layers. Always ends with Dense -> ReLU -> Dropout before the heads.
inline nn::ArchitectureSpec random_small_spec(Rng& rng) {
  for (;;) {
    nn::ArchitectureSpec spec;
    const std::size_t side = 8 + rng.below(7);
    spec.input_shape = {1 + rng.below(2), side, side};
    const std::size_t stages = 1 + rng.below(2);
    spec.conv_filters.clear();
    spec.conv_kernels.clear();
    for (std::size_t s = 0; s < stages; ++s) {
      spec.conv_filters.push_back(1 + rng.below(3));
      spec.conv_kernels.push_back(2 + rng.below(2));
    }
    spec.dense_units.clear();
    const std::size_t dense = 1 + rng.below(2);
    for (std::size_t d = 0; d < dense; ++d) spec.dense_units.push_back(3 + rng.below(6));
    spec.dropout = 0.2;
    std::size_t h = side;
    bool ok = true;
    for (auto k : spec.conv_kernels) {
      if (h < k + 1) ok = false;
      else h = (h - k + 1) / 2;
      if (h == 0) ok = false;
    }
    if (ok) return spec;
  }
}

inline void randomize(nn::Network& net, Rng& rng, double sd = 0.5) {
  auto values = nn::flatten_parameters(net);
  for (double& v : values) v = rng.normal(0.0, sd);
  nn::assign_parameters(net, values);
}

inline nn::Network random_small_network(Rng& rng, double sd = 0.5) {
  nn::Network net = nn::make_network(random_small_spec(rng));
  randomize(net, rng, sd);
  return net;
}

inline Tensor random_image(const nnablate::Shape& shape, Rng& rng) {
  Tensor t(shape);
  for (double& v : t.values()) v = rng.uniform();
  return t;
}

}  // namespace fixture

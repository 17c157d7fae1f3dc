#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nnablate/core/error.hpp"
#include "nnablate/core/tensor.hpp"
#include "nnablate/nn/layers.hpp"

namespace nnablate::nn {

// Network output. Longitudinal lies in [0, 1] (sigmoid head); lateral and
// rotational lie in [-1, 1] (tanh heads), positive meaning "left".
struct Action {
  double longitudinal = 0.0;
  double lateral = 0.0;
  double rotational = 0.0;

  double operator[](std::size_t i) const {
    return i == 0 ? longitudinal : (i == 1 ? lateral : rotational);
  }
  double& operator[](std::size_t i) { return i == 0 ? longitudinal : (i == 1 ? lateral : rotational); }

  friend Action operator-(const Action& a, const Action& b) {
    return {a.longitudinal - b.longitudinal, a.lateral - b.lateral, a.rotational - b.rotational};
  }
  friend bool operator==(const Action&, const Action&) = default;
};

inline constexpr std::array<std::string_view, 3> kComponentNames = {"longitudinal", "lateral", "rotational"};

struct PhysicalAction {
  double longitudinal_cm = 0.0;
  double lateral_cm = 0.0;
  double rotational_deg = 0.0;
};

inline constexpr double kLongitudinalScaleCm = 3.0;
inline constexpr double kLateralScaleCm = 3.0;
inline constexpr double kRotationalScaleDeg = 90.0;

inline PhysicalAction scale_action(const Action& a) {
  return {a.longitudinal * kLongitudinalScaleCm, a.lateral * kLateralScaleCm, a.rotational * kRotationalScaleDeg};
}

struct NetworkMetadata {
  std::int64_t trial_id = -1;
  std::uint64_t seed = 0;
  std::vector<double> loss_history;
  double heldout_mse = 0.0;
  bool undertrained = false;

  friend bool operator==(const NetworkMetadata&, const NetworkMetadata&) = default;
};

// A trunk of layers followed by three scalar heads (longitudinal, lateral,
// rotational), each a Dense(D -> 1) on the flat trunk output.
struct Network {
  Shape input_shape{1, 64, 64};
  std::vector<Layer> trunk;
  std::array<Dense, 3> heads;
  NetworkMetadata meta;

  friend bool operator==(const Network&, const Network&) = default;
};

// Checks that the layer chain is shape compatible and returns the output
// shape of every trunk layer.
inline std::vector<Shape> validate(const Network& net) {
  if (net.input_shape.empty() || shape_size(net.input_shape) == 0)
    throw ShapeError(0, "network input shape is empty");
  std::vector<Shape> shapes;
  shapes.reserve(net.trunk.size());
  Shape current = net.input_shape;
  for (std::size_t i = 0; i < net.trunk.size(); ++i) {
    current = output_shape(net.trunk[i], current, i);
    shapes.push_back(current);
  }
  if (current.size() != 1)
    throw ShapeError(net.trunk.size(), "trunk output " + shape_string(current) + " is not flat");
  for (std::size_t h = 0; h < 3; ++h) {
    const Dense& head = net.heads[h];
    const std::size_t index = net.trunk.size() + h;
    if (head.weights.rank() != 2 || head.out_features() != 1 || head.bias.size() != 1)
      throw ShapeError(index, std::string(kComponentNames[h]) + " head must map to a single output");
    if (head.in_features() != current[0])
      throw ShapeError(index, std::string(kComponentNames[h]) + " head expects " +
                                  std::to_string(head.in_features()) + " inputs, trunk gives " +
                                  std::to_string(current[0]));
  }
  return shapes;
}

struct ArchitectureSpec {
  Shape input_shape{1, 64, 64};
  std::vector<std::size_t> conv_filters{30, 15, 10};
  std::vector<std::size_t> conv_kernels{5, 5, 3};
  std::vector<std::size_t> dense_units{400, 200};
  double dropout = 0.2;
};

// Builds a zero-weight network: conv/relu/pool stages, flatten, then
// dense/relu/dropout stages, then the three heads.
inline Network make_network(const ArchitectureSpec& spec) {
  if (spec.conv_filters.size() != spec.conv_kernels.size())
    throw PreconditionError("make_network: filter and kernel lists differ in length");
  if (spec.input_shape.size() != 3) throw PreconditionError("make_network: input must be (channels, height, width)");
  Network net;
  net.input_shape = spec.input_shape;
  std::size_t channels = spec.input_shape[0];
  for (std::size_t i = 0; i < spec.conv_filters.size(); ++i) {
    net.trunk.emplace_back(make_conv(spec.conv_filters[i], channels, spec.conv_kernels[i], spec.conv_kernels[i]));
    net.trunk.emplace_back(ReLU{});
    net.trunk.emplace_back(MaxPool2D{2});
    channels = spec.conv_filters[i];
  }
  net.trunk.emplace_back(Flatten{});
  Shape shape = spec.input_shape;
  for (std::size_t i = 0; i < net.trunk.size(); ++i) shape = output_shape(net.trunk[i], shape, i);
  std::size_t width = shape[0];
  for (std::size_t units : spec.dense_units) {
    net.trunk.emplace_back(make_dense(units, width));
    net.trunk.emplace_back(ReLU{});
    net.trunk.emplace_back(Dropout{spec.dropout});
    width = units;
  }
  for (auto& head : net.heads) head = make_dense(1, width);
  validate(net);
  return net;
}

// 1x64x64 input; conv 5x5x30, 5x5x15, 3x3x10 each with ReLU and 2x2 pooling;
// dense 400 and 200 with ReLU and dropout 0.2.
inline Network make_reference_network() { return make_network(ArchitectureSpec{}); }

// Trunk indices of the Dense layers, in order.
inline std::vector<std::size_t> dense_layer_indices(const Network& net) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < net.trunk.size(); ++i)
    if (std::holds_alternative<Dense>(net.trunk[i])) out.push_back(i);
  return out;
}

// ---- flat parameter views --------------------------------------------------
// Order: trunk layers in sequence (weights then bias), then the three heads.

template <typename Net, typename Fn>
void for_each_parameter_block(Net& net, Fn&& fn) {
  for (auto& layer : net.trunk) {
    if (auto* conv = std::get_if<Conv2D>(&layer)) {
      fn(conv->weights.values());
      fn(std::span(conv->bias));
    } else if (auto* dense = std::get_if<Dense>(&layer)) {
      fn(dense->weights.values());
      fn(std::span(dense->bias));
    }
  }
  for (auto& head : net.heads) {
    fn(head.weights.values());
    fn(std::span(head.bias));
  }
}

inline std::size_t parameter_count(const Network& net) {
  std::size_t n = 0;
  for_each_parameter_block(net, [&](auto block) { n += block.size(); });
  return n;
}

inline std::vector<double> flatten_parameters(const Network& net) {
  std::vector<double> out;
  out.reserve(parameter_count(net));
  for_each_parameter_block(net, [&](auto block) { out.insert(out.end(), block.begin(), block.end()); });
  return out;
}

inline void assign_parameters(Network& net, std::span<const double> values) {
  if (values.size() != parameter_count(net)) throw PreconditionError("assign_parameters: length mismatch");
  std::size_t offset = 0;
  for_each_parameter_block(net, [&](auto block) {
    std::copy(values.begin() + offset, values.begin() + offset + block.size(), block.begin());
    offset += block.size();
  });
}

}  // namespace nnablate::nn

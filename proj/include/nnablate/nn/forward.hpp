#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nnablate/core/error.hpp"
#include "nnablate/core/random.hpp"
#include "nnablate/core/tensor.hpp"
#include "nnablate/nn/layers.hpp"
#include "nnablate/nn/network.hpp"

namespace nnablate::nn {

enum class Mode { eval, train };

// Forces the listed neurons of one trunk layer's output to exactly zero
// before the next layer sees them.
struct ActivationMask {
  std::size_t layer = 0;
  std::vector<std::size_t> neurons;
};

// Everything backpropagation needs from a forward pass.
struct ForwardTrace {
  std::vector<Tensor> inputs;  // inputs[i] is the input of trunk layer i; inputs.back() is the trunk output
  std::vector<std::vector<std::size_t>> pool_argmax;
  std::vector<std::vector<double>> dropout_scales;
  std::array<double, 3> head_pre{};
  Action action;
};

namespace detail {

inline Action squash_heads(const std::array<double, 3>& z) {
  return {sigmoid(z[0]), std::tanh(z[1]), std::tanh(z[2])};
}

inline Action run_forward(const Network& net, const Tensor& image, Mode mode, const ActivationMask* mask,
                          Rng* rng, ForwardTrace* trace) {
  if (image.shape() != net.input_shape)
    throw ShapeError(0, "input " + shape_string(image.shape()) + " does not match network input " +
                            shape_string(net.input_shape));
  if (mode == Mode::train && rng == nullptr) throw PreconditionError("forward: training mode needs a random source");
  if (mask && mask->layer >= net.trunk.size())
    throw PreconditionError("forward: mask targets layer " + std::to_string(mask->layer) + " of " +
                            std::to_string(net.trunk.size()));

  if (trace) {
    trace->inputs.clear();
    trace->inputs.reserve(net.trunk.size() + 1);
    trace->pool_argmax.assign(net.trunk.size(), {});
    trace->dropout_scales.assign(net.trunk.size(), {});
  }

  Tensor current = image;
  for (std::size_t i = 0; i < net.trunk.size(); ++i) {
    const Layer& layer = net.trunk[i];
    const Shape out_shape = output_shape(layer, current.shape(), i);
    if (trace) trace->inputs.push_back(current);

    Tensor next;
    if (const auto* conv = std::get_if<Conv2D>(&layer)) {
      next = conv2d_forward(*conv, current);
    } else if (const auto* pool = std::get_if<MaxPool2D>(&layer)) {
      next = maxpool_forward(*pool, current, trace ? &trace->pool_argmax[i] : nullptr);
    } else if (const auto* dense = std::get_if<Dense>(&layer)) {
      next = dense_forward(*dense, current);
    } else if (std::holds_alternative<Flatten>(layer)) {
      next = std::move(current);
      next.reshape(out_shape);
    } else if (const auto* drop = std::get_if<Dropout>(&layer)) {
      next = std::move(current);
      if (mode == Mode::train && drop->rate > 0.0) {
        auto scales = dropout_scales(next.size(), drop->rate, *rng);
        for (std::size_t j = 0; j < next.size(); ++j) next[j] *= scales[j];
        if (trace) trace->dropout_scales[i] = std::move(scales);
      }
    } else {
      next = activation_forward(layer, std::move(current));
    }

    if (mask && mask->layer == i) {
      for (std::size_t n : mask->neurons) {
        if (n >= next.size())
          throw PreconditionError("forward: mask neuron " + std::to_string(n) + " outside layer " + std::to_string(i));
        next[n] = 0.0;
      }
    }
    if (!next.all_finite()) throw NumericError(i, std::string(layer_name(layer)) + " produced a non-finite value");
    current = std::move(next);
  }

  if (current.rank() != 1) throw ShapeError(net.trunk.size(), "trunk output is not flat");
  std::array<double, 3> z{};
  for (std::size_t h = 0; h < 3; ++h) {
    const Dense& head = net.heads[h];
    if (head.in_features() != current.size() || head.out_features() != 1)
      throw ShapeError(net.trunk.size() + h, std::string(kComponentNames[h]) + " head does not match trunk output");
    z[h] = dense_forward(head, current)[0];
    if (!std::isfinite(z[h]))
      throw NumericError(net.trunk.size() + h, std::string(kComponentNames[h]) + " head produced a non-finite value");
  }
  const Action action = squash_heads(z);
  if (trace) {
    trace->inputs.push_back(std::move(current));
    trace->head_pre = z;
    trace->action = action;
  }
  return action;
}

}  // namespace detail

// Eval mode is a pure function of (net, image, mask). Training mode draws
// dropout masks from `rng`.
inline Action forward(const Network& net, const Tensor& image, Mode mode = Mode::eval,
                      const ActivationMask* mask = nullptr, Rng* rng = nullptr) {
  return detail::run_forward(net, image, mode, mask, rng, nullptr);
}

inline Action forward(const Network& net, const Tensor& image, const ActivationMask& mask) {
  return detail::run_forward(net, image, Mode::eval, &mask, nullptr, nullptr);
}

inline ForwardTrace forward_trace(const Network& net, const Tensor& image, Mode mode, Rng* rng = nullptr,
                                  const ActivationMask* mask = nullptr) {
  ForwardTrace trace;
  detail::run_forward(net, image, mode, mask, rng, &trace);
  return trace;
}

}  // namespace nnablate::nn

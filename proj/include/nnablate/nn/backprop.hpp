#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "nnablate/nn/forward.hpp"
#include "nnablate/nn/network.hpp"

namespace nnablate::nn {

// Gradient storage with the same block layout as flatten_parameters().
class Gradients {
 public:
  explicit Gradients(const Network& net) : values_(parameter_count(net), 0.0) {
    std::size_t offset = 0;
    for (const auto& layer : net.trunk) {
      Block b{offset, 0, 0};
      if (const auto* conv = std::get_if<Conv2D>(&layer)) {
        b.weights = conv->weights.size();
        b.bias = conv->bias.size();
      } else if (const auto* dense = std::get_if<Dense>(&layer)) {
        b.weights = dense->weights.size();
        b.bias = dense->bias.size();
      }
      offset += b.weights + b.bias;
      trunk_.push_back(b);
    }
    for (std::size_t h = 0; h < 3; ++h) {
      heads_[h] = Block{offset, net.heads[h].weights.size(), 1};
      offset += heads_[h].weights + 1;
    }
  }

  std::span<double> trunk_weights(std::size_t i) { return {values_.data() + trunk_[i].offset, trunk_[i].weights}; }
  std::span<double> trunk_bias(std::size_t i) {
    return {values_.data() + trunk_[i].offset + trunk_[i].weights, trunk_[i].bias};
  }
  std::span<double> head_weights(std::size_t h) { return {values_.data() + heads_[h].offset, heads_[h].weights}; }
  std::span<double> head_bias(std::size_t h) { return {values_.data() + heads_[h].offset + heads_[h].weights, 1}; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  void zero() { std::fill(values_.begin(), values_.end(), 0.0); }

 private:
  struct Block {
    std::size_t offset, weights, bias;
  };
  std::vector<Block> trunk_;
  std::array<Block, 3> heads_{};
  std::vector<double> values_;
};

// Per-sample loss: mean squared error over the three action components.
inline double action_loss(const Action& predicted, const Action& target) {
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double d = predicted[i] - target[i];
    sum += d * d;
  }
  return sum / 3.0;
}

// Adds d(action_loss)/d(parameters) for one traced sample into `grads`.
inline void accumulate_gradients(const Network& net, const ForwardTrace& trace, const Action& target,
                                 Gradients& grads) {
  const Tensor& features = trace.inputs.back();
  Tensor dfeatures(features.shape());
  for (std::size_t h = 0; h < 3; ++h) {
    const double a = trace.action[h];
    const double dloss_da = 2.0 * (a - target[h]) / 3.0;
    const double da_dz = h == 0 ? a * (1.0 - a) : 1.0 - a * a;
    Tensor dz({1}, {dloss_da * da_dz});
    Tensor dfeat_h;
    dense_backward(net.heads[h], features, dz, &dfeat_h, grads.head_weights(h), grads.head_bias(h));
    for (std::size_t j = 0; j < dfeatures.size(); ++j) dfeatures[j] += dfeat_h[j];
  }

  Tensor grad = std::move(dfeatures);
  for (std::size_t li = net.trunk.size(); li-- > 0;) {
    const Layer& layer = net.trunk[li];
    const Tensor& input = trace.inputs[li];
    const Tensor& output = trace.inputs[li + 1];
    const bool need_input_grad = li > 0;
    if (const auto* conv = std::get_if<Conv2D>(&layer)) {
      Tensor din;
      conv2d_backward(*conv, input, grad, need_input_grad ? &din : nullptr, grads.trunk_weights(li),
                      grads.trunk_bias(li));
      grad = std::move(din);
    } else if (const auto* dense = std::get_if<Dense>(&layer)) {
      Tensor din;
      dense_backward(*dense, input, grad, need_input_grad ? &din : nullptr, grads.trunk_weights(li),
                     grads.trunk_bias(li));
      grad = std::move(din);
    } else if (std::holds_alternative<MaxPool2D>(layer)) {
      grad = maxpool_backward(input.shape(), grad, trace.pool_argmax[li]);
    } else if (std::holds_alternative<Flatten>(layer)) {
      grad.reshape(input.shape());
    } else if (std::holds_alternative<Dropout>(layer)) {
      const auto& scales = trace.dropout_scales[li];
      if (!scales.empty())
        for (std::size_t j = 0; j < grad.size(); ++j) grad[j] *= scales[j];
    } else {
      grad = activation_backward(layer, output, std::move(grad));
    }
    if (!need_input_grad) break;
  }
}

}  // namespace nnablate::nn

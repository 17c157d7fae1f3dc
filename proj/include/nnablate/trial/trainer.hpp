#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "nnablate/core/error.hpp"
#include "nnablate/core/random.hpp"
#include "nnablate/nn/backprop.hpp"
#include "nnablate/nn/forward.hpp"
#include "nnablate/nn/network.hpp"
#include "nnablate/trial/wire_image.hpp"

namespace nnablate::trial {

struct TrialConfig {
  std::uint64_t seed = 1;
  std::size_t train_set_size = 192;
  std::size_t epochs = 12;
  double learning_rate = 0.02;
  std::size_t batch_size = 8;
  double dropout = 0.2;
  std::size_t heldout_size = 48;
  double mse_threshold = 0.02;
  nn::ArchitectureSpec architecture{};

  friend bool operator==(const TrialConfig&, const TrialConfig&) = default;
};

inline void validate(const TrialConfig& cfg) {
  if (cfg.train_set_size < 1 || cfg.batch_size < 1 || cfg.heldout_size < 1)
    throw PreconditionError("trial config: counts must be at least 1");
  if (!(cfg.learning_rate > 0.0)) throw PreconditionError("trial config: learning_rate must be positive");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw PreconditionError("trial config: dropout must lie in [0, 1)");
  if (cfg.architecture.input_shape.size() != 3 || cfg.architecture.input_shape[0] != 1 ||
      cfg.architecture.input_shape[1] != cfg.architecture.input_shape[2])
    throw PreconditionError("trial config: input must be a square single-channel image");
}

struct Dataset {
  std::vector<Tensor> images;
  std::vector<nn::Action> targets;

  std::size_t size() const { return images.size(); }
};

inline constexpr std::uint64_t kTrainStream = 0x545241494e;    // "TRAIN"
inline constexpr std::uint64_t kHeldoutStream = 0x484f4c44;    // "HOLD"
inline constexpr std::uint64_t kInitStream = 0x494e4954;       // "INIT"
inline constexpr std::uint64_t kShuffleStream = 0x5348554646;  // "SHUFF"
inline constexpr std::uint64_t kDropoutStream = 0x44524f50;    // "DROP"

// Categories cycle left, right, straight so every dataset is balanced.
inline Dataset make_dataset(std::uint64_t seed, std::uint64_t stream, std::size_t count, std::size_t image_size) {
  Dataset data;
  data.images.reserve(count);
  data.targets.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Category c = kCategories[i % 3];
    auto img = generate_wire_image(c, derive_seed(seed, stream, i), image_size);
    data.images.push_back(std::move(img.pixels));
    data.targets.push_back(img.target);
  }
  return data;
}

// He-normal weights for the trunk, Glorot-normal for the heads, zero biases.
inline nn::Network initialize_network(const nn::ArchitectureSpec& arch, std::uint64_t seed) {
  nn::Network net = nn::make_network(arch);
  Rng rng(derive_seed(seed, kInitStream));
  for (auto& layer : net.trunk) {
    if (auto* conv = std::get_if<nn::Conv2D>(&layer)) {
      const double fan_in = static_cast<double>(conv->in_channels() * conv->kernel_h() * conv->kernel_w());
      const double sd = std::sqrt(2.0 / fan_in);
      for (double& w : conv->weights.values()) w = rng.normal(0.0, sd);
    } else if (auto* dense = std::get_if<nn::Dense>(&layer)) {
      const double sd = std::sqrt(2.0 / static_cast<double>(dense->in_features()));
      for (double& w : dense->weights.values()) w = rng.normal(0.0, sd);
    }
  }
  for (auto& head : net.heads) {
    const double sd = std::sqrt(2.0 / static_cast<double>(head.in_features() + 1));
    for (double& w : head.weights.values()) w = rng.normal(0.0, sd);
  }
  net.meta.seed = seed;
  return net;
}

inline double evaluate_mse(const nn::Network& net, const Dataset& data) {
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    sum += nn::action_loss(nn::forward(net, data.images[i]), data.targets[i]);
  return data.size() ? sum / static_cast<double>(data.size()) : 0.0;
}

inline void sgd_step(nn::Network& net, const nn::Gradients& grads, double step) {
  std::size_t offset = 0;
  const auto& g = grads.values();
  nn::for_each_parameter_block(net, [&](std::span<double> block) {
    for (std::size_t j = 0; j < block.size(); ++j) block[j] -= step * g[offset + j];
    offset += block.size();
  });
}

// Mean of the three components' squared errors over one mini-batch, with the
// gradient of that mean accumulated into `grads` (which is zeroed first).
inline double batch_gradient(const nn::Network& net, const Dataset& data, std::span<const std::size_t> batch,
                             Rng* dropout_rng, nn::Gradients& grads) {
  grads.zero();
  double loss = 0.0;
  const nn::Mode mode = dropout_rng ? nn::Mode::train : nn::Mode::eval;
  for (std::size_t idx : batch) {
    const auto trace = nn::forward_trace(net, data.images[idx], mode, dropout_rng);
    loss += nn::action_loss(trace.action, data.targets[idx]);
    nn::accumulate_gradients(net, trace, data.targets[idx], grads);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& v : grads.values()) v *= inv;
  return loss * inv;
}

// Seeded behaviour cloning with plain mini-batch SGD. Records the training-set
// MSE after every epoch (eval mode, no dropout) and the final held-out MSE.
inline nn::Network train_trial(const TrialConfig& cfg) {
  validate(cfg);
  nn::ArchitectureSpec arch = cfg.architecture;
  arch.dropout = cfg.dropout;
  nn::Network net = initialize_network(arch, cfg.seed);
  const std::size_t image_size = arch.input_shape[1];

  const Dataset heldout = make_dataset(cfg.seed, kHeldoutStream, cfg.heldout_size, image_size);
  if (cfg.epochs > 0) {
    const Dataset train = make_dataset(cfg.seed, kTrainStream, cfg.train_set_size, image_size);
    nn::Gradients grads(net);
    Rng dropout_rng(derive_seed(cfg.seed, kDropoutStream));
    std::vector<std::size_t> order(train.size());
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng shuffle_rng(derive_seed(cfg.seed, kShuffleStream, epoch));
      shuffle_rng.shuffle(order.begin(), order.end());
      double epoch_loss = 0.0;
      try {
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
          const std::size_t end = std::min(order.size(), start + cfg.batch_size);
          const std::span<const std::size_t> batch(order.data() + start, end - start);
          const double loss = batch_gradient(net, train, batch, &dropout_rng, grads);
          if (!std::isfinite(loss)) throw DivergenceError(epoch, "non-finite training loss");
          sgd_step(net, grads, cfg.learning_rate);
        }
        epoch_loss = evaluate_mse(net, train);
      } catch (const NumericError& e) {
        throw DivergenceError(epoch, e.what());
      }
      if (!std::isfinite(epoch_loss)) throw DivergenceError(epoch, "non-finite training loss");
      net.meta.loss_history.push_back(epoch_loss);
    }
  }
  net.meta.heldout_mse = evaluate_mse(net, heldout);
  net.meta.undertrained = cfg.epochs == 0 || !(net.meta.heldout_mse < cfg.mse_threshold);
  return net;
}

}  // namespace nnablate::trial

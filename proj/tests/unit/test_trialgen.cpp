#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "nnablate/ablation/ablate.hpp"
#include "nnablate/nn/network_io.hpp"
#include "nnablate/trial/probe_set.hpp"
#include "nnablate/trial/trainer.hpp"
#include "nnablate/trial/trials.hpp"

using namespace nnablate;
using namespace nnablate::trial;

namespace {

TrialConfig tiny_config(std::uint64_t seed) {
  TrialConfig cfg;
  cfg.seed = seed;
  cfg.train_set_size = 12;
  cfg.heldout_size = 6;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.05;
  cfg.architecture.input_shape = {1, 16, 16};
  cfg.architecture.conv_filters = {2};
  cfg.architecture.conv_kernels = {3};
  cfg.architecture.dense_units = {8, 6};
  return cfg;
}

}  // namespace

TEST(WireImage, StraightTargetIsForwardOnly) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto img = generate_wire_image(Category::straight, s);
    EXPECT_EQ(img.target.longitudinal, 1.0);
    EXPECT_EQ(img.target.lateral, 0.0);
    EXPECT_EQ(img.target.rotational, 0.0);
  }
}

TEST(WireImage, TargetSignsFollowCategory) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto left = generate_wire_image(Category::left_turn, s);
    const auto right = generate_wire_image(Category::right_turn, s);
    EXPECT_GT(left.target.lateral, 0.0);
    EXPECT_GT(left.target.rotational, 0.0);
    EXPECT_LT(right.target.lateral, 0.0);
    EXPECT_LT(right.target.rotational, 0.0);
    EXPECT_EQ(left.target.longitudinal, 1.0);
    for (const auto* img : {&left, &right}) {
      EXPECT_LE(std::abs(img->target.lateral), 1.0);
      EXPECT_LE(std::abs(img->target.rotational), 1.0);
    }
  }
}

TEST(WireImage, PixelsInUnitRangeAndDeterministic) {
  for (auto c : kCategories) {
    const auto a = generate_wire_image(c, 99);
    const auto b = generate_wire_image(c, 99);
    EXPECT_EQ(a.pixels, b.pixels);
    EXPECT_EQ(a.pixels.shape(), (Shape{1, 64, 64}));
    for (double v : a.pixels.values()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
  EXPECT_NE(generate_wire_image(Category::left_turn, 1).pixels, generate_wire_image(Category::left_turn, 2).pixels);
}

TEST(WireImage, LeftTurnInkEndsOnTheLeft) {
  // Ink in the upper half sits left of centre for a left turn.
  auto top_centroid = [](const WireImage& img) {
    double sx = 0, sw = 0;
    for (std::size_t y = 0; y < 32; ++y)
      for (std::size_t x = 0; x < 64; ++x) {
        const double v = img.pixels.at(0, y, x);
        if (v > 0.5) {
          sx += v * static_cast<double>(x);
          sw += v;
        }
      }
    EXPECT_GT(sw, 0.0);
    return sw > 0 ? sx / sw : 32.0;
  };
  for (std::uint64_t s = 0; s < 10; ++s) {
    EXPECT_LT(top_centroid(generate_wire_image(Category::left_turn, s)), 32.0);
    EXPECT_GT(top_centroid(generate_wire_image(Category::right_turn, s)), 32.0);
  }
}

TEST(ProbeSet, TwentyFourImagesEightPerCategoryInFixedOrder) {
  const auto probe = build_probe_set(5);
  ASSERT_EQ(probe.size(), 24u);
  std::array<int, 3> counts{};
  for (std::size_t i = 0; i < 24; ++i) {
    const auto c = probe.images[i].category;
    ++counts[static_cast<int>(c)];
    const Category expected = i < 8 ? Category::left_turn : (i < 16 ? Category::right_turn : Category::straight);
    EXPECT_EQ(c, expected);
  }
  EXPECT_EQ(counts, (std::array<int, 3>{8, 8, 8}));
}

TEST(ProbeSet, SameSeedSameManifestAndRoundTrip) {
  const auto a = build_probe_set(3), b = build_probe_set(3);
  EXPECT_EQ(probe_manifest(a), probe_manifest(b));
  const auto back = parse_probe_set(serialize_probe_set(a));
  ASSERT_EQ(back.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(back.images[i].pixels, a.images[i].pixels);
    EXPECT_EQ(back.images[i].target, a.images[i].target);
  }
  EXPECT_NE(probe_manifest(a), probe_manifest(build_probe_set(4)));
}

TEST(Trainer, ZeroEpochsReturnsInitializationFlaggedUndertrained) {
  auto cfg = tiny_config(7);
  cfg.epochs = 0;
  const auto net = train_trial(cfg);
  auto init = initialize_network(cfg.architecture, cfg.seed);
  EXPECT_EQ(nn::flatten_parameters(net), nn::flatten_parameters(init));
  EXPECT_TRUE(net.meta.undertrained);
  EXPECT_TRUE(net.meta.loss_history.empty());
}

TEST(Trainer, IdenticalConfigsGiveBitIdenticalWeights) {
  const auto a = train_trial(tiny_config(3));
  const auto b = train_trial(tiny_config(3));
  EXPECT_EQ(nn::serialize_network(a), nn::serialize_network(b));
  EXPECT_EQ(a.meta.loss_history.size(), 2u);
  EXPECT_NE(nn::flatten_parameters(a), nn::flatten_parameters(train_trial(tiny_config(4))));
}

TEST(Trainer, ValidationRejectsBadConfigs) {
  auto cfg = tiny_config(1);
  cfg.learning_rate = 0.0;
  EXPECT_THROW(train_trial(cfg), PreconditionError);
  cfg = tiny_config(1);
  cfg.batch_size = 0;
  EXPECT_THROW(train_trial(cfg), PreconditionError);
  cfg = tiny_config(1);
  cfg.dropout = 1.0;
  EXPECT_THROW(train_trial(cfg), PreconditionError);
}

TEST(Trainer, DivergenceCarriesEpoch) {
  auto cfg = tiny_config(2);
  cfg.learning_rate = 1e300;
  try {
    train_trial(cfg);
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.epoch(), 0u);
  }
}

TEST(Trainer, BatchGradientMatchesCentralDifferences) {
  auto cfg = tiny_config(5);
  nn::Network net = initialize_network(cfg.architecture, cfg.seed);
  Rng init(8);
  fixture::randomize(net, init, 0.3);  // no zero biases, so no pre-activation sits exactly on a ReLU kink
  const auto data = make_dataset(cfg.seed, kTrainStream, 4, 16);
  const std::vector<std::size_t> batch = {0, 1, 2, 3};
  nn::Gradients grads(net);
  batch_gradient(net, data, batch, nullptr, grads);
  auto params = nn::flatten_parameters(net);
  nn::Gradients scratch(net);
  Rng pick(1);
  for (int n = 0; n < 200; ++n) {
    const std::size_t p = pick.below(params.size());
    const double keep = params[p];
    params[p] = keep + 1e-5;
    nn::assign_parameters(net, params);
    const double up = batch_gradient(net, data, batch, nullptr, scratch);
    params[p] = keep - 1e-5;
    nn::assign_parameters(net, params);
    const double down = batch_gradient(net, data, batch, nullptr, scratch);
    params[p] = keep;
    nn::assign_parameters(net, params);
    const double numeric = (up - down) / 2e-5, analytic = grads.values()[p];
    EXPECT_LT(std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6}), 1e-4) << p;
  }
}

TEST(Trials, SingleTrialIsPrecondition) {
  EXPECT_THROW(run_trials(1, 1, tiny_config(1)), PreconditionError);
}

TEST(Trials, SeedsAreConsecutiveAndRunsRepeat) {
  const auto a = run_trials(2, 10, tiny_config(0), 2);
  const auto b = run_trials(2, 10, tiny_config(0), 1);
  ASSERT_EQ(a.networks.size(), 2u);
  EXPECT_EQ(a.manifest, b.manifest);
  for (std::size_t t = 0; t < 2; ++t) {
    EXPECT_EQ(a.networks[t].meta.seed, 10 + t);
    EXPECT_EQ(a.networks[t].meta.trial_id, static_cast<std::int64_t>(t));
    EXPECT_EQ(nn::serialize_network(a.networks[t]), nn::serialize_network(b.networks[t]));
  }
  EXPECT_NE(nn::flatten_parameters(a.networks[0]), nn::flatten_parameters(a.networks[1]));
  EXPECT_EQ(manifest_from_json(manifest_to_json(a.manifest)), a.manifest);
}

TEST(Trials, ProbeEvaluationDoesNotMutateNetworks) {
  const auto set = run_trials(2, 1, tiny_config(0), 1);
  const auto probe = build_probe_set(1, 16);
  for (const auto& net : set.networks) {
    const auto before = nn::serialize_network(net);
    const auto first = ablation::compute_baseline(net, probe);
    EXPECT_EQ(ablation::compute_baseline(net, probe), first);
    EXPECT_EQ(nn::serialize_network(net), before);
  }
}

#include <gtest/gtest.h>

#include <cmath>
#include <iostream>

#include "fixtures.hpp"
#include "nnablate/ablation/ablate.hpp"
#include "nnablate/ablation/deltas_csv.hpp"
#include "nnablate/ablation/partition.hpp"
#include "nnablate/nn/network_io.hpp"
#include "nnablate/trial/probe_set.hpp"

using namespace nnablate;
using namespace nnablate::ablation;
using nn::Action;

namespace {

// Two dense layers (widths 12 and 7) on a 12x12 single-channel input.
nn::Network small_probe_network(std::uint64_t seed, double sd = 0.5) {
  nn::ArchitectureSpec spec;
  spec.input_shape = {1, 12, 12};
  spec.conv_filters = {3};
  spec.conv_kernels = {3};
  spec.dense_units = {12, 7};
  nn::Network net = nn::make_network(spec);
  Rng rng(seed);
  fixture::randomize(net, rng, sd);
  return net;
}

const trial::ProbeSet& small_probe() {
  static const trial::ProbeSet probe = trial::build_probe_set(1, 12);
  return probe;
}

}  // namespace

TEST(Partition, TwoHundredIntoTen) {
  const auto net = nn::make_reference_network();
  const auto layer = default_ablation_layer(net);
  EXPECT_EQ(layer, 13u);
  const auto p = partition_layer(net, layer, 10);
  ASSERT_EQ(p.size(), 10u);
  for (std::size_t g = 0; g < 10; ++g) {
    ASSERT_EQ(p.groups[g].size(), 20u);
    EXPECT_EQ(p.groups[g].front(), 20 * g);
    EXPECT_EQ(p.groups[g].back(), 20 * g + 19);
  }
  EXPECT_TRUE(is_exact_cover(p));
}

TEST(Partition, SingletonsAndRemainder) {
  const auto net = nn::make_reference_network();
  const auto singles = partition_layer(net, 13, 200);
  ASSERT_EQ(singles.size(), 200u);
  for (std::size_t g = 0; g < 200; ++g) EXPECT_EQ(singles.groups[g], std::vector<std::size_t>{g});

  nn::ArchitectureSpec spec;
  spec.input_shape = {1, 8, 8};
  spec.conv_filters = {1};
  spec.conv_kernels = {3};
  spec.dense_units = {7};
  const auto seven = nn::make_network(spec);
  const auto p = partition_layer(seven, default_ablation_layer(seven), 3);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p.groups[0], (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(p.groups[1], (std::vector<std::size_t>{3, 4}));
  EXPECT_EQ(p.groups[2], (std::vector<std::size_t>{5, 6}));
  EXPECT_THROW(partition_layer(seven, default_ablation_layer(seven), 8), PreconditionError);
  EXPECT_THROW(partition_layer(seven, 0, 2), PreconditionError);
}

TEST(Partition, RandomGroupingIsAnExactCoverWithSameSizes) {
  const auto net = nn::make_reference_network();
  const auto p = partition_layer_random(net, 13, 10, 5);
  EXPECT_TRUE(is_exact_cover(p));
  for (const auto& g : p.groups) EXPECT_EQ(g.size(), 20u);
  EXPECT_NE(p.groups, partition_layer(net, 13, 10).groups);
  EXPECT_EQ(p.groups, partition_layer_random(net, 13, 10, 5).groups);
}

TEST(Ablate, SurgeryEqualsActivationMask) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const nn::Network net = fixture::random_small_network(rng);
    const auto dense = nn::dense_layer_indices(net);
    const std::size_t layer = dense[rng.below(dense.size())];
    const std::size_t width = dense_at(net, layer).out_features();
    const auto p = partition_layer(net, layer, 1 + rng.below(width));
    const std::size_t g = rng.below(p.size());
    const Tensor image = fixture::random_image(net.input_shape, rng);
    const Action a = nn::forward(ablate_group(net, p, g), image);
    const Action b = nn::forward(net, image, group_mask(p, g));
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(a[c], b[c], 1e-9);
  }
}

TEST(Ablate, ZeroedGroupGivesBaselineExactly) {
  nn::Network net = small_probe_network(3);
  const auto p = partition_layer(net, default_ablation_layer(net), 3);
  auto& target = std::get<nn::Dense>(net.trunk[p.layer_index]);
  for (auto n : p.groups[1]) {
    for (std::size_t i = 0; i < target.in_features(); ++i) target.weight(n, i) = 0.0;
    target.bias[n] = 0.0;
    for (auto& h : net.heads) h.weight(0, n) = 0.0;
  }
  const auto deltas = compute_deltas(net, small_probe(), p);
  for (std::size_t i = 0; i < small_probe().size(); ++i) EXPECT_EQ(deltas[1].delta(i), (Action{0, 0, 0}));
}

TEST(Ablate, SourceNetworkIsUntouched) {
  const nn::Network net = small_probe_network(4);
  const auto before = nn::serialize_network(net);
  const auto baseline = compute_baseline(net, small_probe());
  const auto p = partition_layer(net, default_ablation_layer(net), 7);
  std::vector<nn::Network> copies;
  for (std::size_t g = 0; g < p.size(); ++g) copies.push_back(ablate_group(net, p, g));
  EXPECT_EQ(copies.size(), 7u);
  compute_deltas(net, small_probe(), p, 0, 3);
  EXPECT_EQ(nn::serialize_network(net), before);
  EXPECT_EQ(compute_baseline(net, small_probe()), baseline);
}

TEST(Ablate, OnlyOneGroupZeroedPerCopy) {
  const nn::Network net = small_probe_network(5);
  const auto p = partition_layer(net, default_ablation_layer(net), 7);
  for (std::size_t g = 0; g < p.size(); ++g) {
    const auto cut = ablate_group(net, p, g);
    EXPECT_EQ(non_group_checksum(cut, p, g), non_group_checksum(net, p, g));
    const auto& d = std::get<nn::Dense>(cut.trunk[p.layer_index]);
    for (std::size_t other = 0; other < p.size(); ++other) {
      if (other == g) continue;
      bool any_nonzero = false;
      for (auto n : p.groups[other]) any_nonzero |= d.bias[n] != 0.0;
      EXPECT_TRUE(any_nonzero) << "group " << other << " was zeroed while ablating " << g;
    }
  }
}

TEST(Ablate, InvalidGroupIsRejected) {
  const nn::Network net = small_probe_network(1);
  const auto p = partition_layer(net, default_ablation_layer(net), 7);
  EXPECT_THROW(ablate_group(net, p, 7), PreconditionError);
}

TEST(Baseline, ZeroNetworkGivesMidpoints) {
  nn::Network net = small_probe_network(1, 0.0);
  const auto baseline = compute_baseline(net, small_probe());
  ASSERT_EQ(baseline.size(), 24u);
  for (const auto& a : baseline) EXPECT_EQ(a, (Action{0.5, 0.0, 0.0}));
  const auto p = partition_layer(net, default_ablation_layer(net), 7);
  for (const auto& d : compute_deltas(net, small_probe(), p))
    for (std::size_t i = 0; i < 24; ++i) EXPECT_EQ(d.delta(i), (Action{0, 0, 0}));
}

TEST(Baseline, EqualsAblateNothingAndRepeats) {
  const nn::Network net = small_probe_network(9);
  const auto baseline = compute_baseline(net, small_probe());
  EXPECT_EQ(compute_baseline(net, small_probe()), baseline);
  for (std::size_t i = 0; i < small_probe().size(); ++i) {
    const nn::ActivationMask nothing{default_ablation_layer(net), {}};
    EXPECT_EQ(nn::forward(net, small_probe().images[i].pixels, nothing), baseline[i]);
  }
  const auto p = partition_layer(net, default_ablation_layer(net), 7);
  for (const auto& d : compute_deltas(net, small_probe(), p)) EXPECT_EQ(d.baseline, baseline);
}

TEST(Deltas, WholeLayerGroupMatchesHeadBiases) {
  const nn::Network net = small_probe_network(6);
  const auto p = partition_layer(net, default_ablation_layer(net), 1);
  const auto deltas = compute_deltas(net, small_probe(), p);
  ASSERT_EQ(deltas.size(), 1u);
  // With no surviving neuron the heads see zeros and output their squashed biases.
  const double b0 = net.heads[0].bias[0], b1 = net.heads[1].bias[0], b2 = net.heads[2].bias[0];
  const Action closed{1.0 / (1.0 + std::exp(-b0)), std::tanh(b1), std::tanh(b2)};
  for (std::size_t i = 0; i < 24; ++i)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(deltas[0].ablated[i][c], closed[c], 1e-15);
}

TEST(Deltas, NotAdditiveInGeneral) {
  // Demonstration, not a gate: report how far delta(A u B) is from
  // delta(A) + delta(B) on one network.
  const nn::Network net = small_probe_network(8);
  const auto p = partition_layer(net, default_ablation_layer(net), 7);
  GroupPartition joint = p;
  joint.groups = {p.groups[0], p.groups[1]};
  joint.groups[0].insert(joint.groups[0].end(), p.groups[1].begin(), p.groups[1].end());
  joint.groups[1].clear();
  for (std::size_t g = 2; g < p.size(); ++g)
    joint.groups[1].insert(joint.groups[1].end(), p.groups[g].begin(), p.groups[g].end());
  const auto single = compute_deltas(net, small_probe(), p);
  const auto both = compute_deltas(net, small_probe(), joint);
  double worst = 0.0;
  for (std::size_t i = 0; i < 24; ++i)
    for (std::size_t c = 0; c < 3; ++c)
      worst = std::max(worst, std::abs(both[0].delta(i)[c] - single[0].delta(i)[c] - single[1].delta(i)[c]));
  std::cout << "max |delta(A u B) - delta(A) - delta(B)| = " << worst << "\n";
  RecordProperty("non_additivity", std::to_string(worst));
}

TEST(DeltasCsv, RowCountAndBitExactRoundTrip) {
  const nn::Network net = small_probe_network(2);
  const auto p = partition_layer(net, default_ablation_layer(net), 7);
  std::vector<AblationDelta> all;
  for (std::size_t t = 0; t < 2; ++t) {
    auto d = compute_deltas(net, small_probe(), p, t);
    all.insert(all.end(), d.begin(), d.end());
  }
  const auto cats = probe_categories(small_probe());
  const std::string csv = deltas_to_csv(all, cats);
  EXPECT_EQ(lines_of(csv).size(), 1 + 2 * 7 * 24 * 3);
  EXPECT_EQ(lines_of(csv)[0], "trial,group,image_id,category,component,baseline,ablated,delta");
  const auto table = deltas_from_csv(csv);
  ASSERT_EQ(table.deltas.size(), all.size());
  EXPECT_EQ(table.categories, cats);
  for (std::size_t k = 0; k < all.size(); ++k) {
    EXPECT_EQ(table.deltas[k].trial_id, all[k].trial_id);
    EXPECT_EQ(table.deltas[k].group_id, all[k].group_id);
    EXPECT_EQ(table.deltas[k].baseline, all[k].baseline);
    EXPECT_EQ(table.deltas[k].ablated, all[k].ablated);
  }
  EXPECT_EQ(deltas_to_csv(table.deltas, table.categories), csv);
}

TEST(DeltasCsv, RejectsMalformedInput) {
  EXPECT_THROW(deltas_from_csv("a,b\n"), FormatError);
  EXPECT_THROW(deltas_from_csv(std::string(kDeltasHeader) + "\n0,0,0,left_turn,sideways,0,0,0\n"), FormatError);
  EXPECT_THROW(deltas_from_csv(std::string(kDeltasHeader) + "\n0,0,1,left_turn,lateral,0,0,0\n"), FormatError);
}

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "fixtures.hpp"
#include "nnablate/core/text.hpp"
#include "nnablate/nn/forward.hpp"
#include "nnablate/nn/network_io.hpp"

using namespace nnablate;
using namespace nnablate::nn;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "nnablate_test_network_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

Network trained_looking_reference(std::uint64_t seed) {
  Rng rng(seed);
  Network net = make_reference_network();
  fixture::randomize(net, rng, 0.05);
  net.meta.trial_id = 3;
  net.meta.seed = seed;
  net.meta.loss_history = {0.3, 0.1, 1.0 / 3.0};
  net.meta.heldout_mse = 0.0123456789;
  return net;
}

}  // namespace

TEST(NetworkIo, RoundTripIsBitExactOnHundredImages) {
  const Network net = trained_looking_reference(1);
  const auto path = scratch("roundtrip.net");
  save_network(net, path);
  const Network back = load_network(path);
  EXPECT_EQ(back, net);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Tensor image = fixture::random_image(net.input_shape, rng);
    EXPECT_EQ(forward(back, image), forward(net, image));
  }
  EXPECT_EQ(serialize_network(back), serialize_network(net));
}

TEST(NetworkIo, RandomSmallArchitecturesRoundTrip) {
  Rng rng(4);
  for (int i = 0; i < 30; ++i) {
    const Network net = fixture::random_small_network(rng);
    EXPECT_EQ(parse_network(serialize_network(net)), net);
  }
}

TEST(NetworkIo, LoadedReferenceHasReferenceTrunk) {
  const auto path = scratch("reference.net");
  save_network(make_reference_network(), path);
  const Network net = load_network(path);
  const std::vector<std::string> kinds = {"conv2d", "relu",      "maxpool2d", "conv2d", "relu",  "maxpool2d",
                                          "conv2d", "relu",      "maxpool2d", "flatten", "dense", "relu",
                                          "dropout", "dense", "relu", "dropout"};
  ASSERT_EQ(net.trunk.size(), kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) EXPECT_EQ(layer_name(net.trunk[i]), kinds[i]) << i;
  EXPECT_EQ(std::get<Conv2D>(net.trunk[0]).filters(), 30u);
  EXPECT_EQ(std::get<Conv2D>(net.trunk[0]).kernel_h(), 5u);
  EXPECT_EQ(std::get<Conv2D>(net.trunk[3]).filters(), 15u);
  EXPECT_EQ(std::get<Conv2D>(net.trunk[3]).kernel_h(), 5u);
  EXPECT_EQ(std::get<Conv2D>(net.trunk[6]).filters(), 10u);
  EXPECT_EQ(std::get<Conv2D>(net.trunk[6]).kernel_h(), 3u);
  EXPECT_EQ(std::get<Dense>(net.trunk[10]).out_features(), 400u);
  EXPECT_EQ(std::get<Dense>(net.trunk[13]).out_features(), 200u);
  EXPECT_EQ(std::get<Dropout>(net.trunk[12]).rate, 0.2);
  for (const auto& head : net.heads) {
    EXPECT_EQ(head.out_features(), 1u);
    EXPECT_EQ(head.in_features(), 200u);
  }
}

TEST(NetworkIo, DenseWithWrongRowCountNamesLayer) {
  // Layer 10 declares 399 rows with a consistent blob; the chain then breaks
  // where layer 13 expects 400 inputs.
  const Dense bad = make_dense(399, 250);
  std::string text = serialize_network(make_reference_network());
  const auto start = text.find("layer 10 dense");
  const auto w = text.find("\nweights ", start);
  const auto b = text.find("\nbias ", w + 1);
  const auto end = text.find('\n', b + 1);
  text = text.substr(0, start) + "layer 10 dense 399 250\nweights " + base64::encode_doubles(bad.weights.values()) +
         "\nbias " + base64::encode_doubles(bad.bias) + text.substr(end);
  try {
    parse_network(text);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_EQ(e.layer(), 13u);
    EXPECT_NE(std::string(e.what()).find("layer 13"), std::string::npos);
  }
}

TEST(NetworkIo, BlobOfWrongLengthNamesLayer) {
  std::string text = serialize_network(make_reference_network());
  const auto start = text.find("layer 13 dense");
  const auto w = text.find("\nweights ", start);
  const auto end = text.find('\n', w + 1);
  text = text.substr(0, w) + "\nweights " + base64::encode_doubles(std::vector<double>(10, 0.0)) + text.substr(end);
  try {
    parse_network(text);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_EQ(e.layer(), 13u);
  }
}

TEST(NetworkIo, DistinctErrorKinds) {
  const std::string good = serialize_network(make_reference_network());
  EXPECT_THROW(parse_network("nnablate-network 2\n" + good.substr(good.find('\n') + 1)), VersionError);
  EXPECT_THROW(parse_network("not a network\n"), FormatError);
  EXPECT_THROW(parse_network(good.substr(0, good.size() / 2)), FormatError);
  std::string bad_kind = good;
  bad_kind.replace(bad_kind.find("layer 1 relu"), 12, "layer 1 gelu");
  EXPECT_THROW(parse_network(bad_kind), FormatError);
  EXPECT_THROW(load_network(scratch("does_not_exist.net")), IoError);
}

TEST(NetworkIo, LoadErrorNamesFile) {
  const auto path = scratch("corrupt.net");
  write_file(path, "nnablate-network 1\ninput 1 64 64\ngarbage\n");
  try {
    load_network(path);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("corrupt.net"), std::string::npos);
  }
}

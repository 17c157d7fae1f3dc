#pragma once

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nnablate/core/base64.hpp"
#include "nnablate/core/error.hpp"
#include "nnablate/core/text.hpp"
#include "nnablate/nn/network.hpp"

// Text format, one record per line, described in docs/network-format.md.
// Real-valued arrays are base64 blobs of little-endian IEEE-754 binary64,
// so a save/load round trip is bit-exact.

namespace nnablate::nn {

inline constexpr std::string_view kNetworkMagic = "nnablate-network";
inline constexpr int kNetworkFormatVersion = 1;

namespace detail {

// Shortest representation that parses back to the same double.
inline std::string exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string blob(std::span<const double> values) {
  return values.empty() ? "-" : base64::encode_doubles(values);
}

inline std::vector<double> unblob(std::string_view text) {
  if (text == "-") return {};
  return base64::decode_doubles(text);
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : lines_(lines_of(text)) {}

  // Next non-empty line split on single spaces.
  std::vector<std::string_view> next(std::string_view expect_key = {}) {
    while (pos_ < lines_.size() && lines_[pos_].empty()) ++pos_;
    if (pos_ >= lines_.size()) throw FormatError("network file: unexpected end of file");
    const std::size_t line_no = ++pos_;
    auto fields = split(lines_[line_no - 1], ' ');
    if (!expect_key.empty() && fields[0] != expect_key)
      throw FormatError("network file line " + std::to_string(line_no) + ": expected '" +
                        std::string(expect_key) + "', found '" + std::string(fields[0]) + "'");
    line_ = line_no;
    return fields;
  }

  std::size_t line() const { return line_; }

  void expect_count(const std::vector<std::string_view>& fields, std::size_t n) const {
    if (fields.size() != n)
      throw FormatError("network file line " + std::to_string(line_) + ": expected " + std::to_string(n) +
                        " fields, found " + std::to_string(fields.size()));
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

inline void write_params(std::string& out, const Tensor& weights, const std::vector<double>& bias) {
  out += "weights " + blob(weights.values()) + "\n";
  out += "bias " + blob(bias) + "\n";
}

inline void read_params(LineReader& in, std::size_t index, Tensor& weights, std::vector<double>& bias) {
  auto w = in.next("weights");
  in.expect_count(w, 2);
  auto values = unblob(w[1]);
  if (values.size() != weights.size())
    throw ShapeError(index, "weight blob holds " + std::to_string(values.size()) + " values, shape " +
                                shape_string(weights.shape()) + " needs " + std::to_string(weights.size()));
  weights.storage() = std::move(values);
  auto b = in.next("bias");
  in.expect_count(b, 2);
  auto bias_values = unblob(b[1]);
  if (bias_values.size() != bias.size())
    throw ShapeError(index, "bias blob holds " + std::to_string(bias_values.size()) + " values, expected " +
                                std::to_string(bias.size()));
  bias = std::move(bias_values);
}

}  // namespace detail

inline std::string serialize_network(const Network& net) {
  using detail::exact;
  std::string out;
  out += std::string(kNetworkMagic) + " " + std::to_string(kNetworkFormatVersion) + "\n";
  out += "input";
  for (auto e : net.input_shape) out += " " + std::to_string(e);
  out += "\n";
  out += "meta trial_id " + std::to_string(net.meta.trial_id) + "\n";
  out += "meta seed " + std::to_string(net.meta.seed) + "\n";
  out += "meta heldout_mse " + exact(net.meta.heldout_mse) + "\n";
  out += "meta undertrained " + std::string(net.meta.undertrained ? "1" : "0") + "\n";
  out += "meta loss_history " + std::to_string(net.meta.loss_history.size()) + " " +
         detail::blob(net.meta.loss_history) + "\n";
  out += "layers " + std::to_string(net.trunk.size()) + "\n";
  for (std::size_t i = 0; i < net.trunk.size(); ++i) {
    const Layer& layer = net.trunk[i];
    out += "layer " + std::to_string(i) + " " + std::string(layer_name(layer));
    if (const auto* conv = std::get_if<Conv2D>(&layer)) {
      out += " " + std::to_string(conv->filters()) + " " + std::to_string(conv->in_channels()) + " " +
             std::to_string(conv->kernel_h()) + " " + std::to_string(conv->kernel_w()) + "\n";
      detail::write_params(out, conv->weights, conv->bias);
    } else if (const auto* dense = std::get_if<Dense>(&layer)) {
      out += " " + std::to_string(dense->out_features()) + " " + std::to_string(dense->in_features()) + "\n";
      detail::write_params(out, dense->weights, dense->bias);
    } else if (const auto* pool = std::get_if<MaxPool2D>(&layer)) {
      out += " " + std::to_string(pool->size) + "\n";
    } else if (const auto* drop = std::get_if<Dropout>(&layer)) {
      out += " " + exact(drop->rate) + "\n";
    } else {
      out += "\n";
    }
  }
  for (std::size_t h = 0; h < 3; ++h) {
    const Dense& head = net.heads[h];
    out += "head " + std::string(kComponentNames[h]) + " " + std::to_string(head.out_features()) + " " +
           std::to_string(head.in_features()) + "\n";
    detail::write_params(out, head.weights, head.bias);
  }
  out += "end\n";
  return out;
}

inline Network parse_network(std::string_view text) {
  detail::LineReader in(text);
  auto header = in.next(kNetworkMagic);
  in.expect_count(header, 2);
  const int version = parse_int<int>(header[1]);
  if (version != kNetworkFormatVersion)
    throw VersionError("network file version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kNetworkFormatVersion) + ")");

  Network net;
  auto input = in.next("input");
  net.input_shape.clear();
  for (std::size_t i = 1; i < input.size(); ++i) net.input_shape.push_back(parse_int(input[i]));

  auto meta_field = [&](std::string_view key) {
    auto f = in.next("meta");
    if (f.size() < 3 || f[1] != key) throw FormatError("network file: expected meta " + std::string(key));
    return f;
  };
  net.meta.trial_id = parse_int<std::int64_t>(meta_field("trial_id")[2]);
  net.meta.seed = parse_int<std::uint64_t>(meta_field("seed")[2]);
  net.meta.heldout_mse = parse_double(meta_field("heldout_mse")[2]);
  net.meta.undertrained = parse_int<int>(meta_field("undertrained")[2]) != 0;
  auto history = meta_field("loss_history");
  in.expect_count(history, 4);
  net.meta.loss_history = detail::unblob(history[3]);
  if (net.meta.loss_history.size() != parse_int(history[2]))
    throw FormatError("network file: loss history length mismatch");

  auto layers = in.next("layers");
  in.expect_count(layers, 2);
  const std::size_t n_layers = parse_int(layers[1]);
  for (std::size_t i = 0; i < n_layers; ++i) {
    auto f = in.next("layer");
    if (f.size() < 3 || parse_int(f[1]) != i) throw FormatError("network file: layer records out of order");
    const std::string_view kind = f[2];
    if (kind == "conv2d") {
      in.expect_count(f, 7);
      Conv2D conv = make_conv(parse_int(f[3]), parse_int(f[4]), parse_int(f[5]), parse_int(f[6]));
      detail::read_params(in, i, conv.weights, conv.bias);
      net.trunk.emplace_back(std::move(conv));
    } else if (kind == "dense") {
      in.expect_count(f, 5);
      Dense dense = make_dense(parse_int(f[3]), parse_int(f[4]));
      detail::read_params(in, i, dense.weights, dense.bias);
      net.trunk.emplace_back(std::move(dense));
    } else if (kind == "maxpool2d") {
      in.expect_count(f, 4);
      net.trunk.emplace_back(MaxPool2D{parse_int(f[3])});
    } else if (kind == "dropout") {
      in.expect_count(f, 4);
      net.trunk.emplace_back(Dropout{parse_double(f[3])});
    } else if (kind == "relu") {
      net.trunk.emplace_back(ReLU{});
    } else if (kind == "tanh") {
      net.trunk.emplace_back(Tanh{});
    } else if (kind == "sigmoid") {
      net.trunk.emplace_back(Sigmoid{});
    } else if (kind == "flatten") {
      net.trunk.emplace_back(Flatten{});
    } else {
      throw FormatError("network file: unknown layer kind '" + std::string(kind) + "'");
    }
  }
  for (std::size_t h = 0; h < 3; ++h) {
    auto f = in.next("head");
    in.expect_count(f, 4);
    if (f[1] != kComponentNames[h]) throw FormatError("network file: heads out of order");
    Dense head = make_dense(parse_int(f[2]), parse_int(f[3]));
    detail::read_params(in, n_layers + h, head.weights, head.bias);
    net.heads[h] = std::move(head);
  }
  in.next("end");
  validate(net);
  return net;
}

inline void save_network(const Network& net, const std::filesystem::path& path) {
  validate(net);
  write_file(path, serialize_network(net));
}

inline Network load_network(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_network(text);
  } catch (const ShapeError& e) {
    throw ShapeError(e.layer(), path.string() + ": " + e.detail());
  } catch (const VersionError& e) {
    throw VersionError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace nnablate::nn

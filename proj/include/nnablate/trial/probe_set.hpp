#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nnablate/core/base64.hpp"
#include "nnablate/core/error.hpp"
#include "nnablate/core/random.hpp"
#include "nnablate/core/text.hpp"
#include "nnablate/trial/wire_image.hpp"

namespace nnablate::trial {

inline constexpr std::size_t kImagesPerCategory = 8;
inline constexpr std::uint64_t kProbeStream = 0x50524f4245;  // "PROBE"

// The fixed images every network is evaluated on, ordered by category:
// left turns 0-7, right turns 8-15, straight 16-23.
struct ProbeSet {
  std::uint64_t seed = 0;
  std::vector<WireImage> images;

  std::size_t size() const { return images.size(); }
};

inline ProbeSet build_probe_set(std::uint64_t seed, std::size_t image_size = 64,
                                std::size_t per_category = kImagesPerCategory) {
  ProbeSet probe;
  probe.seed = seed;
  for (Category c : kCategories)
    for (std::size_t j = 0; j < per_category; ++j) {
      const auto index = static_cast<std::uint64_t>(c) * per_category + j;
      probe.images.push_back(generate_wire_image(c, derive_seed(seed, kProbeStream, index), image_size));
    }
  return probe;
}

// One line per image: id, category, image seed and target.
inline std::string probe_manifest(const ProbeSet& probe) {
  std::string out = "id,category,seed,longitudinal,lateral,rotational\n";
  for (std::size_t i = 0; i < probe.images.size(); ++i) {
    const auto& img = probe.images[i];
    out += std::to_string(i) + "," + std::string(category_name(img.category)) + "," + std::to_string(img.seed) + "," +
           format_double(img.target.longitudinal) + "," + format_double(img.target.lateral) + "," +
           format_double(img.target.rotational) + "\n";
  }
  return out;
}

inline constexpr std::string_view kProbeMagic = "nnablate-probe";
inline constexpr int kProbeFormatVersion = 1;

// Images are stored as the same base64 binary64 blobs as network weights.
inline std::string serialize_probe_set(const ProbeSet& probe) {
  std::string out = std::string(kProbeMagic) + " " + std::to_string(kProbeFormatVersion) + "\n";
  out += "seed " + std::to_string(probe.seed) + "\n";
  out += "images " + std::to_string(probe.images.size()) + "\n";
  for (std::size_t i = 0; i < probe.images.size(); ++i) {
    const auto& img = probe.images[i];
    out += "image " + std::to_string(i) + " " + std::string(category_name(img.category)) + " " +
           std::to_string(img.seed) + " " + base64::encode_doubles(std::vector<double>{
                                                  img.target.longitudinal, img.target.lateral, img.target.rotational});
    for (auto e : img.pixels.shape()) out += " " + std::to_string(e);
    out += "\n";
    out += "pixels " + base64::encode_doubles(img.pixels.values()) + "\n";
  }
  out += "end\n";
  return out;
}

inline ProbeSet parse_probe_set(std::string_view text) {
  const auto lines = lines_of(text);
  std::size_t pos = 0;
  auto next = [&](std::string_view key) {
    while (pos < lines.size() && lines[pos].empty()) ++pos;
    if (pos >= lines.size()) throw FormatError("probe file: unexpected end of file");
    auto f = split(lines[pos++], ' ');
    if (f[0] != key) throw FormatError("probe file: expected '" + std::string(key) + "'");
    return f;
  };
  auto header = next(kProbeMagic);
  if (header.size() != 2) throw FormatError("probe file: malformed header");
  if (parse_int<int>(header[1]) != kProbeFormatVersion) throw VersionError("probe file: unsupported version");
  ProbeSet probe;
  probe.seed = parse_int<std::uint64_t>(next("seed").at(1));
  const std::size_t n = parse_int(next("images").at(1));
  for (std::size_t i = 0; i < n; ++i) {
    auto f = next("image");
    if (f.size() != 8 || parse_int(f[1]) != i) throw FormatError("probe file: malformed image record");
    WireImage img;
    img.category = parse_category(f[2]);
    img.seed = parse_int<std::uint64_t>(f[3]);
    const auto target = base64::decode_doubles(f[4]);
    if (target.size() != 3) throw FormatError("probe file: target must hold 3 values");
    img.target = {target[0], target[1], target[2]};
    Shape shape{parse_int(f[5]), parse_int(f[6]), parse_int(f[7])};
    auto px = next("pixels");
    if (px.size() != 2) throw FormatError("probe file: malformed pixel record");
    img.pixels = Tensor(shape, base64::decode_doubles(px[1]));
    probe.images.push_back(std::move(img));
  }
  next("end");
  return probe;
}

inline void save_probe_set(const ProbeSet& probe, const std::filesystem::path& path) {
  write_file(path, serialize_probe_set(probe));
}

inline ProbeSet load_probe_set(const std::filesystem::path& path) {
  try {
    return parse_probe_set(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ShapeError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace nnablate::trial

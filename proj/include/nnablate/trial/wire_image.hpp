#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "nnablate/core/error.hpp"
#include "nnablate/core/random.hpp"
#include "nnablate/core/tensor.hpp"
#include "nnablate/nn/network.hpp"

namespace nnablate::trial {

enum class Category { left_turn = 0, right_turn = 1, straight = 2 };

inline constexpr std::array<Category, 3> kCategories = {Category::left_turn, Category::right_turn,
                                                        Category::straight};

inline std::string_view category_name(Category c) {
  switch (c) {
    case Category::left_turn: return "left_turn";
    case Category::right_turn: return "right_turn";
    case Category::straight: return "straight";
  }
  return "?";
}

inline Category parse_category(std::string_view s) {
  for (auto c : kCategories)
    if (category_name(c) == s) return c;
  throw FormatError("unknown category '" + std::string(s) + "'");
}

// A grayscale rendering of a wire seen from the loop, with the action an
// ideal controller would take.
struct WireImage {
  Tensor pixels;  // (1, size, size), values in [0, 1]
  Category category = Category::straight;
  nn::Action target;
  std::uint64_t seed = 0;
};

// Rendering and target constants. Curvature is in radians per pixel at the
// 64 pixel reference resolution and scales inversely with image size.
struct WireStyle {
  double max_curvature = 1.0 / 40.0;
  double min_curvature_fraction = 0.35;
  double lateral_gain = 0.8;        // lateral = gain * curvature / max_curvature
  double lookahead_fraction = 0.75; // rotational = heading at lookahead / (pi/2)
  double start_jitter = 3.0;
  double min_half_width = 1.0;
  double max_half_width = 1.6;
  double noise = 0.04;
};

inline constexpr std::uint64_t kWireStream = 0x57495245;  // "WIRE"

namespace detail {

inline double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = ax + t * dx - px, ey = ay + t * dy - py;
  return std::sqrt(ex * ex + ey * ey);
}

}  // namespace detail

// Deterministic per (category, seed, size). The wire enters at the bottom
// centre heading up and bends with constant curvature: positive (left) for
// left turns, negative for right turns, zero for straight wires.
inline WireImage generate_wire_image(Category category, std::uint64_t seed, std::size_t size = 64,
                                     const WireStyle& style = {}) {
  if (size < 8) throw PreconditionError("generate_wire_image: size must be at least 8");
  Rng rng(derive_seed(seed, kWireStream, static_cast<std::uint64_t>(category)));
  const double scale = 64.0 / static_cast<double>(size);
  const double max_k = style.max_curvature * scale;

  const double magnitude = rng.uniform(style.min_curvature_fraction, 1.0);
  double fraction = 0.0;
  if (category == Category::left_turn) fraction = magnitude;
  if (category == Category::right_turn) fraction = -magnitude;
  const double curvature = fraction * max_k;

  const double n = static_cast<double>(size);
  const double x0 = n / 2.0 + rng.uniform(-style.start_jitter, style.start_jitter) / scale;
  const double y0 = n;
  const double half_width = rng.uniform(style.min_half_width, style.max_half_width) / scale;

  // Image x grows to the right, so a left turn moves toward smaller x.
  constexpr int kSegments = 160;
  const double length = 1.6 * n;
  std::vector<double> xs(kSegments + 1), ys(kSegments + 1);
  for (int i = 0; i <= kSegments; ++i) {
    const double s = length * i / kSegments;
    if (curvature == 0.0) {
      xs[i] = x0;
      ys[i] = y0 - s;
    } else {
      xs[i] = x0 - (1.0 - std::cos(curvature * s)) / curvature;
      ys[i] = y0 - std::sin(curvature * s) / curvature;
    }
  }

  WireImage image;
  image.category = category;
  image.seed = seed;
  image.pixels = Tensor({1, size, size});
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double px = static_cast<double>(x) + 0.5, py = static_cast<double>(y) + 0.5;
      double d = std::numeric_limits<double>::infinity();
      for (int i = 0; i < kSegments; ++i)
        d = std::min(d, detail::segment_distance(px, py, xs[i], ys[i], xs[i + 1], ys[i + 1]));
      double v = std::clamp(half_width + 0.5 - d, 0.0, 1.0);
      v += style.noise * (2.0 * rng.uniform() - 1.0);
      image.pixels.at(0, y, x) = std::clamp(v, 0.0, 1.0);
    }
  }

  const double lookahead = style.lookahead_fraction * n;
  const double heading = curvature * lookahead;
  image.target.longitudinal = 1.0;
  image.target.lateral = style.lateral_gain * fraction;
  image.target.rotational = std::clamp(heading / (std::numbers::pi / 2.0), -1.0, 1.0);
  return image;
}

}  // namespace nnablate::trial

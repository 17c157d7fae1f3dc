#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nnablate/core/text.hpp"

namespace nnablate::report {

// Coordinates are written with two decimals, label numbers with six
// significant digits; both independent of locale.
inline std::string coord(double v) { return format_fixed(v, 2); }
inline std::string label_number(double v) { return format_double(v, 6); }

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

class SvgDocument {
 public:
  SvgDocument(double width, double height) : width_(width), height_(height) {}

  void rect(double x, double y, double w, double h, std::string_view fill, std::string_view extra = {}) {
    body_ += "<rect x=\"" + coord(x) + "\" y=\"" + coord(y) + "\" width=\"" + coord(w) + "\" height=\"" + coord(h) +
             "\" fill=\"" + std::string(fill) + "\"" + attrs(extra) + "/>\n";
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0,
            std::string_view extra = {}) {
    body_ += "<line x1=\"" + coord(x1) + "\" y1=\"" + coord(y1) + "\" x2=\"" + coord(x2) + "\" y2=\"" + coord(y2) +
             "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + coord(width) + "\"" + attrs(extra) + "/>\n";
  }

  void circle(double cx, double cy, double r, std::string_view fill, std::string_view extra = {}) {
    body_ += "<circle cx=\"" + coord(cx) + "\" cy=\"" + coord(cy) + "\" r=\"" + coord(r) + "\" fill=\"" +
             std::string(fill) + "\"" + attrs(extra) + "/>\n";
  }

  void polygon(const std::vector<std::pair<double, double>>& pts, std::string_view fill, std::string_view extra = {}) {
    std::string p;
    for (const auto& [x, y] : pts) p += (p.empty() ? "" : " ") + coord(x) + "," + coord(y);
    body_ += "<polygon points=\"" + p + "\" fill=\"" + std::string(fill) + "\"" + attrs(extra) + "/>\n";
  }

  void text(double x, double y, std::string_view content, double size = 12.0, std::string_view anchor = "start",
            std::string_view extra = {}) {
    body_ += "<text x=\"" + coord(x) + "\" y=\"" + coord(y) + "\" font-size=\"" + coord(size) +
             "\" font-family=\"sans-serif\" text-anchor=\"" + std::string(anchor) + "\"" + attrs(extra) + ">" +
             xml_escape(content) + "</text>\n";
  }

  void open_group(std::string_view extra) { body_ += "<g" + attrs(extra) + ">\n"; }
  void close_group() { body_ += "</g>\n"; }

  std::string str() const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           coord(width_) + "\" height=\"" + coord(height_) + "\" viewBox=\"0 0 " + coord(width_) + " " +
           coord(height_) + "\">\n" + body_ + "</svg>\n";
  }

 private:
  static std::string attrs(std::string_view extra) { return extra.empty() ? "" : " " + std::string(extra); }

  double width_, height_;
  std::string body_;
};

inline constexpr std::array<std::string_view, 12> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};

inline constexpr std::array<std::string_view, 12> kPaletteLight = {
    "#c6dbef", "#fdd0a2", "#c7e9c0", "#fcbba1", "#dadaeb", "#e7cbb5",
    "#f7d3ea", "#d9d9d9", "#ecedb0", "#b9ecf1", "#c5c6e4", "#dde4c4"};

inline std::string_view cluster_color(std::size_t c) { return kPalette[c % kPalette.size()]; }
inline std::string_view cluster_fill(std::size_t c) { return kPaletteLight[c % kPaletteLight.size()]; }

// A distinct marker per trial: a circle, then regular polygons with a growing
// number of sides, each side count drawn upright and then rotated by half a
// vertex step (triangle up/down, square/diamond, ...).
inline std::string marker_shape_name(std::size_t trial) {
  if (trial == 0) return "circle";
  const std::size_t sides = 3 + (trial - 1) / 2;
  return "polygon" + std::to_string(sides) + ((trial - 1) % 2 ? "-rotated" : "");
}

inline void draw_marker(SvgDocument& svg, std::size_t trial, double cx, double cy, double r, std::string_view fill,
                        std::string_view extra) {
  const std::string attr = "stroke=\"#222222\" stroke-width=\"0.80\" data-shape=\"" + marker_shape_name(trial) + "\"" +
                           (extra.empty() ? "" : " " + std::string(extra));
  if (trial == 0) {
    svg.circle(cx, cy, r, fill, attr);
    return;
  }
  const std::size_t sides = 3 + (trial - 1) / 2;
  const bool rotated = (trial - 1) % 2 == 1;
  std::vector<std::pair<double, double>> pts;
  const double start = -std::numbers::pi / 2.0 + (rotated ? std::numbers::pi / static_cast<double>(sides) : 0.0);
  for (std::size_t i = 0; i < sides; ++i) {
    const double a = start + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(sides);
    pts.emplace_back(cx + r * std::cos(a), cy + r * std::sin(a));
  }
  svg.polygon(pts, fill, attr);
}

}  // namespace nnablate::report

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nnablate/ablation/deltas_csv.hpp"
#include "nnablate/core/error.hpp"
#include "nnablate/core/text.hpp"
#include "nnablate/report/svg.hpp"

namespace nnablate::report {

// The parts of an analysis bundle the figures draw from, read back from disk.
struct BundleView {
  std::size_t chosen_k = 0;
  std::size_t n_trials = 0;
  bool no_structure = false;
  std::array<double, 2> explained{};

  struct Point {
    std::size_t trial = 0, group = 0, cluster = 0;
    double pc1 = 0.0, pc2 = 0.0;
  };
  std::vector<Point> points;
  std::vector<std::array<double, 2>> centroids_2d;

  struct Cluster {
    std::size_t cluster = 0, members = 0, trials_covered = 0;
    double mean_lateral = 0.0, mean_rotational = 0.0;
    double sign_consistency = 0.0;
  };
  std::vector<Cluster> clusters;
};

inline BundleView read_report_bundle(const std::filesystem::path& dir) {
  BundleView v;
  nlohmann::json summary;
  try {
    summary = nlohmann::json::parse(read_file(dir / "summary.json"));
    v.chosen_k = summary.at("chosen_k").get<std::size_t>();
    v.n_trials = summary.at("n_trials").get<std::size_t>();
    v.no_structure = summary.at("no_structure").get<bool>();
    v.explained = {summary.at("explained_variance")[0].get<double>(), summary.at("explained_variance")[1].get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError((dir / "summary.json").string() + ": " + e.what());
  }
  const auto assign = parse_csv(read_file(dir / "assignments.csv"));
  const auto ct = assign.column("trial"), cg = assign.column("group"), cc = assign.column("cluster"),
             c1 = assign.column("pc1"), c2 = assign.column("pc2");
  for (const auto& row : assign.rows)
    v.points.push_back({parse_int(row[ct]), parse_int(row[cg]), parse_int(row[cc]), parse_double(row[c1]),
                        parse_double(row[c2])});
  const auto cent = parse_csv(read_file(dir / "centroids_2d.csv"));
  for (const auto& row : cent.rows) v.centroids_2d.push_back({parse_double(row[1]), parse_double(row[2])});
  const auto clusters = parse_csv(read_file(dir / "clusters.csv"));
  for (const auto& row : clusters.rows)
    v.clusters.push_back({parse_int(row[clusters.column("cluster")]), parse_int(row[clusters.column("members")]),
                          parse_int(row[clusters.column("trials_covered")]),
                          parse_double(row[clusters.column("mean_lateral")]),
                          parse_double(row[clusters.column("mean_rotational")]),
                          parse_double(row[clusters.column("lateral_sign_consistency")])});
  if (v.centroids_2d.empty()) throw FormatError(dir.string() + ": bundle has no centroids");
  return v;
}

namespace detail {

struct Axis {
  double lo, hi;
  double px_lo, px_hi;
  double map(double v) const { return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo); }
};

inline double symmetric_limit(double max_abs) { return max_abs > 0.0 ? max_abs * 1.15 : 1.0; }

inline void y_axis_with_ticks(SvgDocument& svg, const Axis& y, double x_left, double x_right) {
  for (int i = 0; i <= 4; ++i) {
    const double v = y.lo + (y.hi - y.lo) * i / 4.0;
    const double py = y.map(v);
    svg.line(x_left, py, x_right, py, "#e0e0e0", 0.5);
    svg.text(x_left - 6, py + 4, label_number(v), 10, "end");
  }
  svg.line(x_left, y.px_lo, x_left, y.px_hi, "#333333", 1.0);
}

// Paired lateral/rotational bars, one pair per category on the x axis.
inline void paired_bars(SvgDocument& svg, const std::vector<std::array<double, 2>>& values,
                        const std::vector<std::string>& labels, double left, double right, double top, double bottom) {
  double max_abs = 0.0;
  for (const auto& v : values) max_abs = std::max({max_abs, std::abs(v[0]), std::abs(v[1])});
  const double lim = symmetric_limit(max_abs);
  const Axis y{-lim, lim, bottom, top};
  y_axis_with_ticks(svg, y, left, right);
  const double zero = y.map(0.0);
  const double slot = (right - left) / static_cast<double>(std::max<std::size_t>(1, values.size()));
  const double bar = slot * 0.35;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x0 = left + slot * static_cast<double>(i) + slot * 0.15;
    for (std::size_t c = 0; c < 2; ++c) {
      const double py = y.map(values[i][c]);
      svg.rect(x0 + bar * static_cast<double>(c), std::min(py, zero), bar, std::abs(py - zero), cluster_color(c),
               "class=\"bar\" data-component=\"" + std::string(c == 0 ? "lateral" : "rotational") +
                   "\" data-value=\"" + label_number(values[i][c]) + "\"");
    }
    svg.text(left + slot * (static_cast<double>(i) + 0.5), bottom + 16, labels[i], 10, "middle");
  }
  svg.line(left, zero, right, zero, "#333333", 1.0);
}

inline void component_legend(SvgDocument& svg, double x, double y) {
  svg.rect(x, y - 9, 10, 10, cluster_color(0));
  svg.text(x + 14, y, "lateral (positive = left)", 11);
  svg.rect(x + 170, y - 9, 10, 10, cluster_color(1));
  svg.text(x + 184, y, "rotational (positive = left)", 11);
}

}  // namespace detail

// Per-group change in action for one trial and one probe image.
inline std::string render_fig2(const ablation::DeltaTable& table, std::size_t trial, std::size_t image) {
  std::vector<const ablation::AblationDelta*> rows;
  for (const auto& d : table.deltas)
    if (d.trial_id == trial) rows.push_back(&d);
  if (rows.empty()) throw PreconditionError("fig2: no deltas for trial " + std::to_string(trial));
  if (image >= table.categories.size()) throw PreconditionError("fig2: image " + std::to_string(image) + " out of range");
  std::vector<std::array<double, 2>> values;
  std::vector<std::string> labels;
  for (const auto* d : rows) {
    const auto delta = d->delta(image);
    values.push_back({delta.lateral, delta.rotational});
    labels.push_back("g" + std::to_string(d->group_id));
  }
  SvgDocument svg(760, 440);
  svg.rect(0, 0, 760, 440, "#ffffff");
  svg.text(380, 24,
           "Trial " + std::to_string(trial) + ", image " + std::to_string(image) + " (" +
               std::string(trial::category_name(table.categories[image])) + "): change in action per ablated group",
           14, "middle");
  detail::paired_bars(svg, values, labels, 80, 730, 60, 380);
  svg.text(405, 420, "ablation group", 11, "middle");
  detail::component_legend(svg, 90, 48);
  return svg.str();
}

// PCA scatter: colour = cluster, marker = trial, background = nearest
// projected centroid on a raster grid.
inline std::string render_fig3(const BundleView& b, std::size_t grid = 120) {
  const double W = 720, H = 640, left = 70, right = 560, top = 50, bottom = 570;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  auto extend = [&](double x, double y) {
    if (first) {
      xmin = xmax = x;
      ymin = ymax = y;
      first = false;
    }
    xmin = std::min(xmin, x), xmax = std::max(xmax, x), ymin = std::min(ymin, y), ymax = std::max(ymax, y);
  };
  for (const auto& p : b.points) extend(p.pc1, p.pc2);
  for (const auto& c : b.centroids_2d) extend(c[0], c[1]);
  auto pad = [](double& lo, double& hi) {
    const double span = hi - lo;
    if (span <= 0.0) {
      lo -= 1.0;
      hi += 1.0;
    } else {
      lo -= 0.08 * span;
      hi += 0.08 * span;
    }
  };
  pad(xmin, xmax);
  pad(ymin, ymax);
  const detail::Axis ax{xmin, xmax, left, right}, ay{ymin, ymax, bottom, top};

  SvgDocument svg(W, H);
  svg.rect(0, 0, W, H, "#ffffff");
  svg.text(W / 2, 26, "Expanded action space, first two principal components", 14, "middle");

  const double cw = (right - left) / static_cast<double>(grid), ch = (bottom - top) / static_cast<double>(grid);
  svg.open_group("class=\"regions\"");
  for (std::size_t gy = 0; gy < grid; ++gy) {
    const double y = ymax - (static_cast<double>(gy) + 0.5) / static_cast<double>(grid) * (ymax - ymin);
    std::size_t run_start = 0, run_cluster = 0;
    for (std::size_t gx = 0; gx <= grid; ++gx) {
      std::size_t cluster = run_cluster;
      if (gx < grid) {
        const double x = xmin + (static_cast<double>(gx) + 0.5) / static_cast<double>(grid) * (xmax - xmin);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < b.centroids_2d.size(); ++c) {
          const double dx = x - b.centroids_2d[c][0], dy = y - b.centroids_2d[c][1];
          const double d = dx * dx + dy * dy;
          if (d < best) {
            best = d;
            cluster = c;
          }
        }
      }
      if (gx == 0) {
        run_cluster = cluster;
        continue;
      }
      if (gx == grid || cluster != run_cluster) {
        svg.rect(left + cw * static_cast<double>(run_start), top + ch * static_cast<double>(gy),
                 cw * static_cast<double>(gx - run_start), ch, cluster_fill(run_cluster),
                 "class=\"region\" data-cluster=\"" + std::to_string(run_cluster) + "\"");
        run_start = gx;
        run_cluster = cluster;
      }
    }
  }
  svg.close_group();

  svg.line(left, bottom, right, bottom, "#333333");
  svg.line(left, top, left, bottom, "#333333");
  for (int i = 0; i <= 4; ++i) {
    const double vx = xmin + (xmax - xmin) * i / 4.0, vy = ymin + (ymax - ymin) * i / 4.0;
    svg.text(ax.map(vx), bottom + 16, label_number(vx), 10, "middle");
    svg.text(left - 6, ay.map(vy) + 4, label_number(vy), 10, "end");
  }
  svg.text((left + right) / 2, bottom + 40,
           "PC1 (" + label_number(100.0 * b.explained[0]) + "% of variance)", 12, "middle");
  svg.text(20, (top + bottom) / 2,
           "PC2 (" + label_number(100.0 * b.explained[1]) + "% of variance)", 12, "middle",
           "transform=\"rotate(-90 20 " + coord((top + bottom) / 2) + ")\"");

  svg.open_group("class=\"points\"");
  for (const auto& p : b.points)
    draw_marker(svg, p.trial, ax.map(p.pc1), ay.map(p.pc2), 6.0, cluster_color(p.cluster),
                "class=\"point\" data-trial=\"" + std::to_string(p.trial) + "\" data-group=\"" +
                    std::to_string(p.group) + "\" data-cluster=\"" + std::to_string(p.cluster) + "\"");
  svg.close_group();
  for (std::size_t c = 0; c < b.centroids_2d.size(); ++c) {
    const double x = ax.map(b.centroids_2d[c][0]), y = ay.map(b.centroids_2d[c][1]);
    svg.line(x - 6, y - 6, x + 6, y + 6, "#000000", 2.0, "class=\"centroid\"");
    svg.line(x - 6, y + 6, x + 6, y - 6, "#000000", 2.0);
  }

  double ly = top + 10;
  svg.text(575, ly, "clusters", 12);
  for (std::size_t c = 0; c < b.centroids_2d.size(); ++c) {
    ly += 18;
    svg.rect(575, ly - 10, 12, 12, cluster_color(c));
    svg.text(593, ly, "cluster " + std::to_string(c), 11);
  }
  ly += 30;
  svg.text(575, ly, "trials", 12);
  svg.open_group("class=\"trial-legend\"");
  for (std::size_t t = 0; t < b.n_trials; ++t) {
    ly += 18;
    draw_marker(svg, t, 581, ly - 4, 6.0, "#ffffff", "class=\"legend-marker\" data-trial=\"" + std::to_string(t) + "\"");
    svg.text(593, ly, "trial " + std::to_string(t), 11);
  }
  svg.close_group();
  if (b.no_structure) svg.text(W / 2, H - 10, "no structure: every ablation changed the output identically", 12, "middle");
  return svg.str();
}

// Mean change in action when a cluster's groups are ablated.
inline std::string render_fig4(const BundleView& b) {
  std::vector<std::array<double, 2>> values;
  std::vector<std::string> labels;
  for (const auto& c : b.clusters) {
    values.push_back({c.mean_lateral, c.mean_rotational});
    labels.push_back("c" + std::to_string(c.cluster) + " (" + std::to_string(c.trials_covered) + "/" +
                     std::to_string(b.n_trials) + " trials)");
  }
  const double width = std::max(520.0, 120.0 + 95.0 * static_cast<double>(values.size()));
  SvgDocument svg(width, 440);
  svg.rect(0, 0, width, 440, "#ffffff");
  svg.text(width / 2, 24, "Average change in action when each cluster's groups are ablated", 14, "middle");
  detail::paired_bars(svg, values, labels, 80, width - 30, 60, 380);
  svg.text((width + 50) / 2, 420, "cluster (trials represented)", 11, "middle");
  detail::component_legend(svg, 90, 48);
  return svg.str();
}

}  // namespace nnablate::report

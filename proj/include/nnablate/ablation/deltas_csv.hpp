#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nnablate/ablation/ablate.hpp"
#include "nnablate/core/error.hpp"
#include "nnablate/core/text.hpp"
#include "nnablate/trial/probe_set.hpp"

namespace nnablate::ablation {

inline constexpr std::string_view kDeltasHeader = "trial,group,image_id,category,component,baseline,ablated,delta";

// One row per (trial, group, image, component), in that nesting order.
// Reals use 17 significant digits.
inline std::string deltas_to_csv(const std::vector<AblationDelta>& deltas,
                                 const std::vector<trial::Category>& categories) {
  std::string out(kDeltasHeader);
  out += "\n";
  for (const auto& d : deltas) {
    if (d.image_count() != categories.size()) throw PreconditionError("deltas_to_csv: image count mismatch");
    for (std::size_t i = 0; i < d.image_count(); ++i) {
      for (std::size_t c = 0; c < 3; ++c) {
        out += std::to_string(d.trial_id) + "," + std::to_string(d.group_id) + "," + std::to_string(i) + "," +
               std::string(trial::category_name(categories[i])) + "," + std::string(nn::kComponentNames[c]) + "," +
               format_double(d.baseline[i][c]) + "," + format_double(d.ablated[i][c]) + "," +
               format_double(d.delta(i)[c]) + "\n";
      }
    }
  }
  return out;
}

inline std::vector<trial::Category> probe_categories(const trial::ProbeSet& probe) {
  std::vector<trial::Category> out;
  for (const auto& img : probe.images) out.push_back(img.category);
  return out;
}

struct DeltaTable {
  std::vector<AblationDelta> deltas;  // ordered by (trial, group)
  std::vector<trial::Category> categories;
};

inline DeltaTable deltas_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != kDeltasHeader) throw FormatError("deltas csv: missing or unexpected header");
  std::map<std::pair<std::size_t, std::size_t>, AblationDelta> by_key;
  std::map<std::size_t, trial::Category> categories;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto f = split(lines[li], ',');
    if (f.size() != 8) throw FormatError("deltas csv line " + std::to_string(li + 1) + ": expected 8 fields");
    const std::size_t t = parse_int(f[0]), g = parse_int(f[1]), img = parse_int(f[2]);
    const auto cat = trial::parse_category(f[3]);
    std::size_t comp = 3;
    for (std::size_t c = 0; c < 3; ++c)
      if (f[4] == nn::kComponentNames[c]) comp = c;
    if (comp == 3) throw FormatError("deltas csv line " + std::to_string(li + 1) + ": unknown component");
    auto& d = by_key[{t, g}];
    d.trial_id = t;
    d.group_id = g;
    if (d.baseline.size() <= img) {
      d.baseline.resize(img + 1);
      d.ablated.resize(img + 1);
    }
    d.baseline[img][comp] = parse_double(f[5]);
    d.ablated[img][comp] = parse_double(f[6]);
    auto [it, inserted] = categories.emplace(img, cat);
    if (!inserted && it->second != cat) throw FormatError("deltas csv: inconsistent category for image " + std::to_string(img));
  }
  DeltaTable table;
  for (auto& [key, d] : by_key) table.deltas.push_back(std::move(d));
  std::size_t expect = 0;
  for (auto& [img, cat] : categories) {
    if (img != expect++) throw FormatError("deltas csv: image ids are not contiguous");
    table.categories.push_back(cat);
  }
  for (const auto& d : table.deltas)
    if (d.image_count() != table.categories.size())
      throw FormatError("deltas csv: trial " + std::to_string(d.trial_id) + " group " + std::to_string(d.group_id) +
                        " does not cover every image");
  return table;
}

inline void save_deltas_csv(const std::filesystem::path& path, const std::vector<AblationDelta>& deltas,
                            const std::vector<trial::Category>& categories) {
  write_file(path, deltas_to_csv(deltas, categories));
}

inline DeltaTable load_deltas_csv(const std::filesystem::path& path) {
  try {
    return deltas_from_csv(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace nnablate::ablation

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "nnablate/core/error.hpp"
#include "nnablate/core/text.hpp"
#include "nnablate/trial/trainer.hpp"

namespace nnablate::report {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct FigureConfig {
  bool fig2 = true;
  bool fig3 = true;
  bool fig4 = true;
  std::size_t fig2_trial = 0;
  std::size_t fig2_image = 0;
  std::size_t region_grid = 120;  // cells per side of the fig3 decision-region raster

  friend bool operator==(const FigureConfig&, const FigureConfig&) = default;
};

struct TrainingConfig {
  std::size_t train_set_size = 192;
  std::size_t epochs = 12;
  double learning_rate = 0.02;
  std::size_t batch_size = 8;
  double dropout = 0.2;
  std::size_t heldout_size = 48;
  double mse_threshold = 0.02;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

// Everything a run depends on. Trials use seeds seed .. seed + trials - 1.
struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t trials = 5;
  std::size_t groups = 10;
  std::size_t k_min = 2;
  std::size_t k_max = 12;
  std::string out = "nnablate-run";
  std::string grouping = "contiguous";  // or "random"
  std::int64_t layer = -1;              // trunk index of the ablated Dense layer; -1 = last one
  std::size_t kmeans_restarts = 20;
  std::size_t threads = 0;              // 0 = hardware concurrency
  TrainingConfig training;
  FigureConfig figures;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline trial::TrialConfig trial_config(const RunConfig& c) {
  trial::TrialConfig t;
  t.seed = c.seed;
  t.train_set_size = c.training.train_set_size;
  t.epochs = c.training.epochs;
  t.learning_rate = c.training.learning_rate;
  t.batch_size = c.training.batch_size;
  t.dropout = c.training.dropout;
  t.heldout_size = c.training.heldout_size;
  t.mse_threshold = c.training.mse_threshold;
  return t;
}

inline void validate(const RunConfig& c) {
  if (c.trials < 2) throw ConfigError("trials must be at least 2");
  if (c.groups < 1) throw ConfigError("groups must be at least 1");
  if (c.k_min < 2 || c.k_max < c.k_min) throw ConfigError("k range must satisfy 2 <= k_min <= k_max");
  if (c.grouping != "contiguous" && c.grouping != "random") throw ConfigError("grouping must be contiguous or random");
  if (c.kmeans_restarts < 1) throw ConfigError("kmeans_restarts must be at least 1");
  if (c.out.empty()) throw ConfigError("out must not be empty");
  if (c.figures.region_grid < 2) throw ConfigError("figures.region_grid must be at least 2");
  try {
    trial::validate(trial_config(c));
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
}

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"trials", c.trials},
          {"groups", c.groups},
          {"k_min", c.k_min},
          {"k_max", c.k_max},
          {"out", c.out},
          {"grouping", c.grouping},
          {"layer", c.layer},
          {"kmeans_restarts", c.kmeans_restarts},
          {"threads", c.threads},
          {"training",
           {{"train_set_size", c.training.train_set_size},
            {"epochs", c.training.epochs},
            {"learning_rate", c.training.learning_rate},
            {"batch_size", c.training.batch_size},
            {"dropout", c.training.dropout},
            {"heldout_size", c.training.heldout_size},
            {"mse_threshold", c.training.mse_threshold}}},
          {"figures",
           {{"fig2", c.figures.fig2},
            {"fig3", c.figures.fig3},
            {"fig4", c.figures.fig4},
            {"fig2_trial", c.figures.fig2_trial},
            {"fig2_image", c.figures.fig2_image},
            {"region_grid", c.figures.region_grid}}}};
}

namespace detail {

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown key '" + where + it.key() + "'");
  }
}

}  // namespace detail

// Missing keys keep their defaults; unknown keys are rejected.
inline RunConfig config_from_json(const nlohmann::json& j) {
  using detail::read_key;
  RunConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    detail::reject_unknown(j,
                           {"seed", "trials", "groups", "k_min", "k_max", "out", "grouping", "layer",
                            "kmeans_restarts", "threads", "training", "figures"},
                           "");
    read_key(j, "seed", c.seed);
    read_key(j, "trials", c.trials);
    read_key(j, "groups", c.groups);
    read_key(j, "k_min", c.k_min);
    read_key(j, "k_max", c.k_max);
    read_key(j, "out", c.out);
    read_key(j, "grouping", c.grouping);
    read_key(j, "layer", c.layer);
    read_key(j, "kmeans_restarts", c.kmeans_restarts);
    read_key(j, "threads", c.threads);
    if (j.contains("training")) {
      const auto& t = j.at("training");
      detail::reject_unknown(t,
                             {"train_set_size", "epochs", "learning_rate", "batch_size", "dropout", "heldout_size",
                              "mse_threshold"},
                             "training.");
      read_key(t, "train_set_size", c.training.train_set_size);
      read_key(t, "epochs", c.training.epochs);
      read_key(t, "learning_rate", c.training.learning_rate);
      read_key(t, "batch_size", c.training.batch_size);
      read_key(t, "dropout", c.training.dropout);
      read_key(t, "heldout_size", c.training.heldout_size);
      read_key(t, "mse_threshold", c.training.mse_threshold);
    }
    if (j.contains("figures")) {
      const auto& f = j.at("figures");
      detail::reject_unknown(f, {"fig2", "fig3", "fig4", "fig2_trial", "fig2_image", "region_grid"}, "figures.");
      read_key(f, "fig2", c.figures.fig2);
      read_key(f, "fig3", c.figures.fig3);
      read_key(f, "fig4", c.figures.fig4);
      read_key(f, "fig2_trial", c.figures.fig2_trial);
      read_key(f, "fig2_image", c.figures.fig2_image);
      read_key(f, "region_grid", c.figures.region_grid);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline std::string serialize_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

inline RunConfig parse_config(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

inline void save_config(const RunConfig& c, const std::filesystem::path& path) { write_file(path, serialize_config(c)); }

}  // namespace nnablate::report

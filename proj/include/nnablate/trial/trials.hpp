#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nnablate/core/error.hpp"
#include "nnablate/core/parallel.hpp"
#include "nnablate/core/random.hpp"
#include "nnablate/nn/network.hpp"
#include "nnablate/trial/probe_set.hpp"
#include "nnablate/trial/trainer.hpp"

namespace nnablate::trial {

struct TrialRecord {
  std::size_t trial_id = 0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  double heldout_mse = 0.0;
  bool undertrained = false;
  std::vector<double> loss_history;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct TrialManifest {
  std::uint64_t base_seed = 0;
  std::uint64_t probe_seed = 0;
  std::vector<TrialRecord> trials;

  friend bool operator==(const TrialManifest&, const TrialManifest&) = default;
};

struct TrialSet {
  std::vector<nn::Network> networks;
  ProbeSet probe;
  TrialManifest manifest;
};

// The probe set is derived from the base seed but lives on its own stream,
// so it never coincides with any trial's training images.
inline std::uint64_t probe_seed_for(std::uint64_t base_seed) { return derive_seed(base_seed, kProbeStream); }

// Trains n networks with seeds base_seed .. base_seed + n - 1. Trials may run
// in parallel; each one owns its random streams, so the result does not
// depend on scheduling.
inline TrialSet run_trials(std::size_t n, std::uint64_t base_seed, TrialConfig cfg = {},
                           std::size_t threads = default_thread_count()) {
  if (n < 2) throw PreconditionError("run_trials: at least 2 trials are needed for cross-trial clustering");
  validate(cfg);
  TrialSet set;
  set.networks.resize(n);
  parallel_for(
      n,
      [&](std::size_t t) {
        TrialConfig trial_cfg = cfg;
        trial_cfg.seed = base_seed + t;
        try {
          set.networks[t] = train_trial(trial_cfg);
        } catch (const DivergenceError& e) {
          throw DivergenceError(e.epoch(), "trial " + std::to_string(t) + ": " + e.what());
        }
        set.networks[t].meta.trial_id = static_cast<std::int64_t>(t);
      },
      threads);

  set.manifest.base_seed = base_seed;
  set.manifest.probe_seed = probe_seed_for(base_seed);
  set.probe = build_probe_set(set.manifest.probe_seed, cfg.architecture.input_shape[1]);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& meta = set.networks[t].meta;
    set.manifest.trials.push_back(TrialRecord{t, meta.seed,
                                              meta.loss_history.empty() ? 0.0 : meta.loss_history.back(),
                                              meta.heldout_mse, meta.undertrained, meta.loss_history});
  }
  return set;
}

inline nlohmann::json manifest_to_json(const TrialManifest& m) {
  nlohmann::json j;
  j["format"] = "nnablate-manifest";
  j["version"] = 1;
  j["base_seed"] = m.base_seed;
  j["probe_seed"] = m.probe_seed;
  j["trials"] = nlohmann::json::array();
  for (const auto& t : m.trials) {
    j["trials"].push_back({{"trial", t.trial_id},
                           {"seed", t.seed},
                           {"final_loss", t.final_loss},
                           {"heldout_mse", t.heldout_mse},
                           {"undertrained", t.undertrained},
                           {"loss_history", t.loss_history},
                           {"network", "trial_" + std::to_string(t.trial_id) + ".net"}});
  }
  return j;
}

inline TrialManifest manifest_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "nnablate-manifest") throw FormatError("manifest: wrong format tag");
    if (j.at("version") != 1) throw VersionError("manifest: unsupported version");
    TrialManifest m;
    m.base_seed = j.at("base_seed").get<std::uint64_t>();
    m.probe_seed = j.at("probe_seed").get<std::uint64_t>();
    for (const auto& t : j.at("trials")) {
      m.trials.push_back(TrialRecord{t.at("trial").get<std::size_t>(), t.at("seed").get<std::uint64_t>(),
                                     t.at("final_loss").get<double>(), t.at("heldout_mse").get<double>(),
                                     t.at("undertrained").get<bool>(),
                                     t.at("loss_history").get<std::vector<double>>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

inline std::string network_filename(std::size_t trial_id) { return "trial_" + std::to_string(trial_id) + ".net"; }

}  // namespace nnablate::trial

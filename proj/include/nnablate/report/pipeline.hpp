#pragma once

#include <filesystem>
#include <string>
#include <system_error>
#include <vector>

#include "nnablate/ablation/ablate.hpp"
#include "nnablate/ablation/deltas_csv.hpp"
#include "nnablate/ablation/partition.hpp"
#include "nnablate/analysis/report.hpp"
#include "nnablate/core/error.hpp"
#include "nnablate/core/parallel.hpp"
#include "nnablate/nn/network_io.hpp"
#include "nnablate/report/config.hpp"
#include "nnablate/report/figures.hpp"
#include "nnablate/trial/probe_set.hpp"
#include "nnablate/trial/trials.hpp"

namespace nnablate::report {

// Process exit codes; documented in docs/cli.md.
enum class ExitCode : int {
  ok = 0,
  internal = 1,
  usage = 2,
  config = 3,
  io = 4,
  divergence = 5,
  missing_artifact = 6,
  corrupt_artifact = 7,
  precondition = 8,
  numeric = 9,
};

class PipelineError : public Error {
 public:
  PipelineError(ExitCode code, const std::string& what) : Error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

inline std::string_view exit_code_name(ExitCode c) {
  switch (c) {
    case ExitCode::ok: return "ok";
    case ExitCode::internal: return "internal";
    case ExitCode::usage: return "usage";
    case ExitCode::config: return "config";
    case ExitCode::io: return "io";
    case ExitCode::divergence: return "divergence";
    case ExitCode::missing_artifact: return "missing_artifact";
    case ExitCode::corrupt_artifact: return "corrupt_artifact";
    case ExitCode::precondition: return "precondition";
    case ExitCode::numeric: return "numeric";
  }
  return "internal";
}

inline ExitCode classify(const std::exception& e) {
  if (const auto* p = dynamic_cast<const PipelineError*>(&e)) return p->code();
  if (dynamic_cast<const ConfigError*>(&e)) return ExitCode::config;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const std::filesystem::filesystem_error*>(&e))
    return ExitCode::io;
  if (dynamic_cast<const DivergenceError*>(&e)) return ExitCode::divergence;
  if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const VersionError*>(&e) ||
      dynamic_cast<const ShapeError*>(&e))
    return ExitCode::corrupt_artifact;
  if (dynamic_cast<const PreconditionError*>(&e)) return ExitCode::precondition;
  if (dynamic_cast<const NumericError*>(&e)) return ExitCode::numeric;
  return ExitCode::internal;
}

// Artifact locations under the run's output directory.
struct RunPaths {
  std::filesystem::path root;

  explicit RunPaths(const std::filesystem::path& out) : root(out) {}

  std::filesystem::path config() const { return root / "config.json"; }
  std::filesystem::path networks() const { return root / "networks"; }
  std::filesystem::path network(std::size_t t) const { return networks() / trial::network_filename(t); }
  std::filesystem::path probe() const { return root / "probe.txt"; }
  std::filesystem::path probe_manifest() const { return root / "probe_manifest.csv"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path deltas() const { return root / "deltas.csv"; }
  std::filesystem::path analysis() const { return root / "analysis"; }
  std::filesystem::path figures() const { return root / "figures"; }
  std::filesystem::path fig2() const { return figures() / "fig2_ablation.svg"; }
  std::filesystem::path fig3() const { return figures() / "fig3_pca.svg"; }
  std::filesystem::path fig4() const { return figures() / "fig4_clusters.svg"; }
};

struct CommandResult {
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> written;
};

namespace detail {

inline void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
}

inline void require(const std::filesystem::path& p, std::string_view stage) {
  if (!std::filesystem::exists(p))
    throw PipelineError(ExitCode::missing_artifact,
                        "missing '" + p.string() + "'; run '" + std::string(stage) + "' first");
}

inline std::size_t threads_for(const RunConfig& c) { return c.threads ? c.threads : default_thread_count(); }

}  // namespace detail

inline CommandResult cmd_train(const RunConfig& cfg) {
  validate(cfg);
  const RunPaths paths(cfg.out);
  detail::make_dir(paths.networks());
  CommandResult res;
  const auto set = trial::run_trials(cfg.trials, cfg.seed, trial_config(cfg), detail::threads_for(cfg));
  for (std::size_t t = 0; t < set.networks.size(); ++t) {
    nn::save_network(set.networks[t], paths.network(t));
    res.written.push_back(paths.network(t));
    if (set.networks[t].meta.undertrained)
      res.warnings.push_back("trial " + std::to_string(t) + " is undertrained (held-out mse " +
                             format_double(set.networks[t].meta.heldout_mse, 6) + ")");
  }
  trial::save_probe_set(set.probe, paths.probe());
  write_file(paths.probe_manifest(), trial::probe_manifest(set.probe));
  write_file(paths.manifest(), trial::manifest_to_json(set.manifest).dump(2) + "\n");
  save_config(cfg, paths.config());
  res.written.insert(res.written.end(), {paths.probe(), paths.probe_manifest(), paths.manifest(), paths.config()});
  return res;
}

inline ablation::GroupPartition partition_for(const RunConfig& cfg, const nn::Network& net) {
  const std::size_t layer = cfg.layer < 0 ? ablation::default_ablation_layer(net) : static_cast<std::size_t>(cfg.layer);
  if (cfg.grouping == "random")
    return ablation::partition_layer_random(net, layer, cfg.groups, derive_seed(cfg.seed, 0x52414e44));  // "RAND"
  return ablation::partition_layer(net, layer, cfg.groups);
}

inline CommandResult cmd_ablate(const RunConfig& cfg) {
  validate(cfg);
  const RunPaths paths(cfg.out);
  detail::require(paths.manifest(), "train");
  detail::require(paths.probe(), "train");
  const auto manifest = trial::manifest_from_json([&] {
    try {
      return nlohmann::json::parse(read_file(paths.manifest()));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(paths.manifest().string() + ": " + e.what());
    }
  }());
  const auto probe = trial::load_probe_set(paths.probe());
  std::vector<ablation::AblationDelta> all;
  for (const auto& record : manifest.trials) {
    const auto file = paths.network(record.trial_id);
    detail::require(file, "train");
    const nn::Network net = nn::load_network(file);
    const auto partition = partition_for(cfg, net);
    auto deltas = ablation::compute_deltas(net, probe, partition, record.trial_id, detail::threads_for(cfg));
    all.insert(all.end(), std::make_move_iterator(deltas.begin()), std::make_move_iterator(deltas.end()));
  }
  ablation::save_deltas_csv(paths.deltas(), all, ablation::probe_categories(probe));
  return {{}, {paths.deltas()}};
}

inline CommandResult cmd_analyze(const RunConfig& cfg) {
  validate(cfg);
  const RunPaths paths(cfg.out);
  detail::require(paths.deltas(), "ablate");
  const auto table = ablation::load_deltas_csv(paths.deltas());
  analysis::AnalysisOptions opt;
  opt.seed = cfg.seed;
  opt.k_min = cfg.k_min;
  opt.k_max = cfg.k_max;
  opt.restarts = cfg.kmeans_restarts;
  opt.threads = detail::threads_for(cfg);
  const auto report = analysis::analyze(table.deltas, opt);
  analysis::write_report_bundle(report, paths.analysis());
  CommandResult res;
  for (const auto& f : analysis::report_bundle_files()) res.written.push_back(paths.analysis() / f);
  if (report.no_structure) res.warnings.push_back("no_structure: every ablation changed the output identically");
  return res;
}

inline CommandResult cmd_report(const RunConfig& cfg) {
  validate(cfg);
  const RunPaths paths(cfg.out);
  for (const auto& f : analysis::report_bundle_files()) detail::require(paths.analysis() / f, "analyze");
  const auto bundle = read_report_bundle(paths.analysis());
  detail::make_dir(paths.figures());
  CommandResult res;
  if (cfg.figures.fig2) {
    detail::require(paths.deltas(), "ablate");
    const auto table = ablation::load_deltas_csv(paths.deltas());
    write_file(paths.fig2(), render_fig2(table, cfg.figures.fig2_trial, cfg.figures.fig2_image));
    res.written.push_back(paths.fig2());
  }
  if (cfg.figures.fig3) {
    write_file(paths.fig3(), render_fig3(bundle, cfg.figures.region_grid));
    res.written.push_back(paths.fig3());
  }
  if (cfg.figures.fig4) {
    write_file(paths.fig4(), render_fig4(bundle));
    res.written.push_back(paths.fig4());
  }
  return res;
}

inline CommandResult cmd_all(const RunConfig& cfg) {
  CommandResult res;
  for (auto* step : {&cmd_train, &cmd_ablate, &cmd_analyze, &cmd_report}) {
    auto r = step(cfg);
    res.warnings.insert(res.warnings.end(), r.warnings.begin(), r.warnings.end());
    res.written.insert(res.written.end(), r.written.begin(), r.written.end());
  }
  return res;
}

}  // namespace nnablate::report

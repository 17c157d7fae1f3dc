// nnablate: train trial networks, ablate neuron groups, cluster the
// resulting output changes and draw the figures.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nnablate/report/pipeline.hpp"

namespace {

using nnablate::report::ExitCode;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> groups;
  std::optional<std::string> out;
  std::optional<std::size_t> image;
  std::optional<std::size_t> fig2_trial;
  std::optional<std::size_t> threads;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration (see docs/config.md)");
  cmd->add_option("--seed", o.seed, "base seed; trials use seed .. seed + trials - 1");
  cmd->add_option("--trials", o.trials, "number of independently trained networks");
  cmd->add_option("--groups", o.groups, "number of neuron groups in the ablated layer");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

nnablate::report::RunConfig resolve(const Overrides& o) {
  auto cfg = o.config.empty() ? nnablate::report::RunConfig{} : nnablate::report::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.groups) cfg.groups = *o.groups;
  if (o.out) cfg.out = *o.out;
  if (o.image) cfg.figures.fig2_image = *o.image;
  if (o.fig2_trial) cfg.figures.fig2_trial = *o.fig2_trial;
  if (o.threads) cfg.threads = *o.threads;
  return cfg;
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group-wise ablation and functional-localization analysis of small trained networks"};
  app.require_subcommand(1);
  Overrides o;
  using Command = nnablate::report::CommandResult (*)(const nnablate::report::RunConfig&);
  Command command = nullptr;

  auto* train = app.add_subcommand("train", "train the trial networks and write the probe set");
  auto* ablate = app.add_subcommand("ablate", "ablate each neuron group and write deltas.csv");
  auto* analyze = app.add_subcommand("analyze", "cluster the expanded action space and write the report bundle");
  auto* report = app.add_subcommand("report", "draw the SVG figures from the report bundle");
  auto* all = app.add_subcommand("all", "train, ablate, analyze and report");
  for (auto* cmd : {train, ablate, analyze, report, all}) add_common_flags(cmd, o);
  for (auto* cmd : {report, all}) {
    cmd->add_option("--image", o.image, "probe image shown in the per-group figure");
    cmd->add_option("--fig2-trial", o.fig2_trial, "trial shown in the per-group figure");
  }
  train->callback([&] { command = &nnablate::report::cmd_train; });
  ablate->callback([&] { command = &nnablate::report::cmd_ablate; });
  analyze->callback([&] { command = &nnablate::report::cmd_analyze; });
  report->callback([&] { command = &nnablate::report::cmd_report; });
  all->callback([&] { command = &nnablate::report::cmd_all; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "nnablate: error kind=usage exit=" << static_cast<int>(ExitCode::usage) << " message=\""
              << one_line(e.what()) << "\"\n";
    return static_cast<int>(ExitCode::usage);
  }

  try {
    const auto cfg = resolve(o);
    const auto result = command(cfg);
    for (const auto& w : result.warnings) std::cerr << "nnablate: warning " << one_line(w) << "\n";
    for (const auto& p : result.written) std::cout << p.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    const ExitCode code = nnablate::report::classify(e);
    std::cerr << "nnablate: error kind=" << nnablate::report::exit_code_name(code)
              << " exit=" << static_cast<int>(code) << " message=\"" << one_line(e.what()) << "\"\n";
    return static_cast<int>(code);
  }
}

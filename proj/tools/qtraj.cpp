// Command-line front end: run, oracle, compare, presets, reproduce.
#include <fmt/format.h>

#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include "qtraj/config_io.hpp"
#include "qtraj/error.hpp"
#include "qtraj/presets.hpp"
#include "qtraj/runner.hpp"

namespace {

using qtraj::ExitCode;

struct ScenarioOptions {
  std::string preset;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> ensemble;
  std::optional<std::string> mode;
  std::optional<int> threads;
  std::string out;

  void attach(CLI::App* app, bool with_mode) {
    app->add_option("--preset", preset, "Preset scenario (see `presets`)");
    app->add_option("--config", config_path, "INI config file, applied over the preset");
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--ensemble", ensemble, "Number of initial trajectories");
    if (with_mode) {
      app->add_option("--mode", mode, "quantum or classical")
          ->check(CLI::IsMember({"quantum", "classical"}));
    }
    app->add_option("--threads", threads, "OpenMP threads (0: default)");
    app->add_option("--out", out, "Output directory")->required();
  }

  [[nodiscard]] qtraj::ScenarioConfig build() const {
    std::optional<qtraj::ScenarioConfig> base;
    if (!preset.empty()) base = qtraj::preset(preset);
    qtraj::ScenarioConfig config =
        config_path.empty() ? base.value_or(qtraj::ScenarioConfig{})
                            : qtraj::load_config(config_path, base);
    if (seed) config.seed = *seed;
    if (ensemble) config.ensemble_size = *ensemble;
    if (mode) config.mode = qtraj::parse_mode(*mode);
    if (threads) config.threads = *threads;
    config.validate();
    return config;
  }
};

int run(const ScenarioOptions& options, qtraj::Source source) {
  const qtraj::ScenarioConfig config = options.build();
  const auto report = qtraj::run_scenario(config, source, options.out);
  fmt::print("{} run '{}' finished in {:.1f} s; outputs in {}\n",
             source == qtraj::Source::kOracle ? "oracle" : "monte carlo", config.name,
             report.run.wall_seconds, options.out);
  return 0;
}

int reproduce(const std::string& out, std::optional<std::uint64_t> seed,
              std::optional<std::int64_t> ensemble, std::optional<int> threads) {
  bool pass = true;
  for (const std::string name : {"narrow", "wide"}) {
    qtraj::ScenarioConfig config = qtraj::preset(name);
    if (seed) config.seed = *seed;
    if (ensemble) config.ensemble_size = *ensemble;
    if (threads) config.threads = *threads;
    const auto bundle = qtraj::run_bundle(config, std::filesystem::path(out) / name);
    fmt::print("{}\n", qtraj::summary_table(name, bundle));
    const auto comparison = qtraj::compare_results(bundle.quantum, bundle.oracle);
    fmt::print("monte carlo vs oracle ({}):\n{}\n", name, qtraj::format_report(comparison));
    pass = pass && comparison.pass();
  }
  return pass ? 0 : static_cast<int>(ExitCode::kComparisonFail);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wigner-trajectory tunneling simulator"};
  app.require_subcommand(1);

  ScenarioOptions run_options;
  auto* run_cmd = app.add_subcommand("run", "Monte Carlo run of one scenario");
  run_options.attach(run_cmd, true);

  ScenarioOptions oracle_options;
  auto* oracle_cmd = app.add_subcommand("oracle", "Split-step Schroedinger reference run");
  oracle_options.attach(oracle_cmd, false);

  std::string dir_a;
  std::string dir_b;
  double sigmas = 3.0;
  double peak_fraction = 0.05;
  auto* compare_cmd = app.add_subcommand("compare", "Compare two output directories");
  compare_cmd->add_option("a", dir_a, "Run directory")->required();
  compare_cmd->add_option("b", dir_b, "Reference run directory")->required();
  compare_cmd->add_option("--sigmas", sigmas, "Tolerance in combined standard errors");
  compare_cmd->add_option("--peak-fraction", peak_fraction, "Tolerance as a fraction of the peak");

  std::string show;
  auto* presets_cmd = app.add_subcommand("presets", "List presets or print one as config text");
  presets_cmd->add_option("--show", show, "Preset to print");

  std::string reproduce_out;
  std::optional<std::uint64_t> reproduce_seed;
  std::optional<std::int64_t> reproduce_ensemble;
  std::optional<int> reproduce_threads;
  auto* reproduce_cmd = app.add_subcommand(
      "reproduce", "Both presets: quantum, classical, free and oracle runs plus the table");
  reproduce_cmd->add_option("--out", reproduce_out, "Output directory")->required();
  reproduce_cmd->add_option("--seed", reproduce_seed, "Random seed");
  reproduce_cmd->add_option("--ensemble", reproduce_ensemble, "Number of initial trajectories");
  reproduce_cmd->add_option("--threads", reproduce_threads, "OpenMP threads (0: default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }

  try {
    if (*run_cmd) return run(run_options, qtraj::Source::kMonteCarlo);
    if (*oracle_cmd) return run(oracle_options, qtraj::Source::kOracle);
    if (*compare_cmd) {
      const auto report = qtraj::compare_dirs(dir_a, dir_b, sigmas, peak_fraction);
      fmt::print("{}", qtraj::format_report(report));
      return report.pass() ? 0 : static_cast<int>(ExitCode::kComparisonFail);
    }
    if (*presets_cmd) {
      if (show.empty()) {
        for (const auto& name : qtraj::preset_names()) fmt::print("{}\n", name);
      } else {
        fmt::print("{}", qtraj::emit_config(qtraj::preset(show)));
      }
      return 0;
    }
    if (*reproduce_cmd) {
      return reproduce(reproduce_out, reproduce_seed, reproduce_ensemble, reproduce_threads);
    }
  } catch (const qtraj::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return static_cast<int>(ExitCode::kCompute);
  }
  return 0;
}

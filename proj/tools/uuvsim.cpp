// uuvsim: run tank scenarios and score the tracking pipeline.
//
//   uuvsim run <scenario-file|builtin> [--out DIR] [--seed N] [--set key=value ...]
//   uuvsim list-scenarios
//   uuvsim metrics <run-dir>
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include "uuv/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void print_metrics(const std::map<std::string, double>& metrics) {
  for (const auto& [k, v] : metrics) fmt::print("{:<28} {}\n", k, v);
}

int cmd_run(const std::string& scenario_arg, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed, std::vector<std::string> overrides) {
  if (seed) overrides.push_back(fmt::format("seed={}", *seed));
  const uuv::Scenario s = uuv::load_scenario(scenario_arg, overrides);
  const auto started = std::chrono::steady_clock::now();
  const uuv::RunArtifacts run = uuv::run_scenario(s);
  const std::string dir = out_dir.empty() ? "runs/" + s.name : out_dir;
  uuv::write_artifacts(run, dir);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  fmt::print("scenario {} ({} s simulated, {:.2f} s wall) -> {}\n", s.name, s.duration,
             elapsed.count(), dir);
  print_metrics(run.metrics);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tank testbed simulator and tracking-pipeline evaluator"};
  app.require_subcommand(1);

  std::string scenario_arg;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Run a scenario and write its artifacts");
  run->add_option("scenario", scenario_arg, "Scenario file or built-in name")->required();
  run->add_option("--out", out_dir, "Output directory (default runs/<name>)");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--set", overrides, "Override a scenario key (key=value)");

  auto* list = app.add_subcommand("list-scenarios", "List the built-in scenarios");

  std::string run_dir;
  auto* metrics = app.add_subcommand("metrics", "Recompute metrics from a run directory");
  metrics->add_option("run-dir", run_dir, "Directory written by 'run'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(scenario_arg, out_dir, seed, overrides);
    if (*list) {
      for (const auto& name : uuv::builtin_scenario_names()) fmt::print("{}\n", name);
      return 0;
    }
    if (*metrics) {
      print_metrics(uuv::metrics_from_run_dir(run_dir));
      return 0;
    }
  } catch (const uuv::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitRuntime;
  }
  return 0;
}

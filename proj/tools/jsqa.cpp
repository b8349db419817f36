#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "jsqa/errors.hpp"
#include "jsqa/experiment.hpp"

namespace {

unsigned threads_from_env() {
  if (const char* env = std::getenv("JSQA_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t > 0) return static_cast<unsigned>(t);
    } catch (const std::exception&) {
    }
    std::cerr << "jsqa: ignoring JSQA_THREADS='" << env << "'\n";
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"JSQ with abandonment: simulation sweeps and exact-oracle checks"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a gamma sweep described by a manifest");
  std::string manifest_path;
  std::string out_dir;
  unsigned threads = 0;
  run->add_option("manifest", manifest_path, "Experiment manifest (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides the manifest)");
  run->add_option("--threads", threads, "Worker threads for replicas (default: JSQA_THREADS or 1)");

  auto* check = app.add_subcommand("oracle-check", "Compare the simulator with the exact truncated chain");
  std::string config_path;
  std::optional<std::int64_t> cap;
  std::uint64_t seed = 0;
  std::int64_t samples = 1'000'000;
  std::int64_t replicas = 4;
  bool fault = false;
  check->add_option("config", config_path, "System config (JSON)")->required();
  check->add_option("--cap", cap, "Per-queue state cap (default: automatic)");
  check->add_option("--seed", seed, "Random seed")->required();
  check->add_option("--samples", samples, "Retained samples");
  check->add_option("--replicas", replicas, "Independent replicas");
  check->add_option("--threads", threads, "Worker threads");
  check->add_flag("--inject-abandonment-fault", fault)->group("");

  auto* dom = app.add_subcommand("domination", "Check the pathwise ordering of the coupled chains");
  std::int64_t horizon = 0;
  dom->add_option("config", config_path, "Single-server system config (JSON)")->required();
  dom->add_option("--horizon", horizon, "Number of slots")->required();
  dom->add_option("--seed", seed, "Random seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (threads == 0) threads = threads_from_env();

  try {
    if (*run) {
      const auto manifest = jsqa::load_manifest(manifest_path);
      jsqa::RunOptions options;
      if (!out_dir.empty()) options.out_dir = out_dir;
      options.threads = threads;
      const auto summary = jsqa::run_experiment(manifest, options);
      std::cout << "ks_trend," << summary.ks_trend << "\nzscore_trend," << summary.zscore_trend << "\nssc_trend,"
                << summary.ssc_trend << '\n';
      return 0;
    }
    if (*check) {
      const auto config = jsqa::load_config(config_path);
      const auto report = jsqa::validate(config);
      if (!report.ok) throw jsqa::ValidationError(report.violations.front());
      const auto plan = jsqa::SamplingPlan::defaults(config, samples, replicas);
      jsqa::SimulationOptions sim;
      sim.threads = threads;
      if (fault) sim.fault = jsqa::Fault::abandonment_skip_one;
      const auto result = jsqa::oracle_check(config, cap, plan, seed, sim);
      jsqa::write_report(std::cout, result);
      return result.passed ? 0 : 1;
    }
    if (*dom) {
      const auto config = jsqa::load_config(config_path);
      const auto report = jsqa::validate(config);
      if (!report.ok) throw jsqa::ValidationError(report.violations.front());
      const auto result = jsqa::simulate_coupled_domination(config, jsqa::CouplingBounds::for_config(config), horizon, seed);
      jsqa::write_report(std::cout, result);
      return result.holds() ? 0 : 1;
    }
  } catch (const jsqa::ValidationError& e) {
    std::cerr << "jsqa: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "jsqa: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

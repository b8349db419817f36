#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jsqa/oracle.hpp"
#include "jsqa/regimes.hpp"
#include "jsqa/simulator.hpp"

namespace jsqa {

/// A gamma sweep over one regime. Plan fields left unset are derived per
/// gamma from SamplingPlan::defaults.
struct ExperimentManifest {
  RegimeSpec regime;
  std::vector<double> gammas;
  std::int64_t num_samples = 100'000;
  std::int64_t replicas = 4;
  std::optional<std::int64_t> warmup_slots;
  std::optional<std::int64_t> thinning;
  std::vector<double> phi_grid;
  std::vector<int> moment_orders{1, 2};
  std::uint64_t seed = 0;
  std::filesystem::path outputs = "results";

  SamplingPlan plan_for(const SystemConfig& config) const;
  /// Throws ValidationError on an empty or non-decreasing gamma list, bad
  /// orders, or a gamma for which the regime has no valid config.
  void validate() const;
};

ExperimentManifest manifest_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentManifest& m);
ExperimentManifest load_manifest(const std::filesystem::path& path);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  unsigned threads = 1;
  /// Called before each gamma point; lets tests inject failures.
  std::function<void(std::size_t index, double gamma)> before_gamma;
};

struct GammaSummary {
  double gamma = 0.0;
  double ks_coordinate = 0.0;
  double max_abs_moment_z = 0.0;
  double perp_second_moment = 0.0;
  double total_second_moment = 0.0;
};

struct RunSummary {
  std::vector<GammaSummary> points;
  std::string ks_trend;       // "decreasing" or "not-decreasing"
  std::string zscore_trend;   // "shrinking" or "not-shrinking"
  std::string ssc_trend;      // "bounded", "unbounded" or "n/a"
};

/// Writes results.csv (gamma,regime,statistic,key,value,stderr), flushed
/// after every gamma point, manifest.json with derived constants, and
/// summary.csv with the convergence trends.
RunSummary run_experiment(const ExperimentManifest& manifest, const RunOptions& options = {});

struct ZRow {
  std::string statistic;
  double simulated = 0.0;
  double std_error = 0.0;
  double exact = 0.0;
  double z = 0.0;
};

/// (simulated - exact)/std_error, with 0/0 read as agreement.
double z_score(double simulated, double exact, double std_error) noexcept;

struct OracleCheckReport {
  std::vector<ZRow> rows;
  std::int64_t cap = 0;
  double leakage = 0.0;
  bool passed = false;  // every |z| < 4
};

OracleCheckReport oracle_check(const SystemConfig& config, std::optional<std::int64_t> cap,
                               const SamplingPlan& plan, std::uint64_t seed, const SimulationOptions& options = {});

void write_report(std::ostream& out, const OracleCheckReport& report);
void write_report(std::ostream& out, const DominationReport& report);

}  // namespace jsqa

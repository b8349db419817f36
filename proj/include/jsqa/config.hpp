#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "jsqa/distribution.hpp"

namespace jsqa {

/// Full parameterization of the discrete-time JSQ system with abandonment.
/// A plain aggregate: it may hold invalid values, which validate() reports.
struct SystemConfig {
  int n = 1;
  double gamma = 0.0;
  BoundedDistribution arrivals = BoundedDistribution::constant(0);
  std::vector<BoundedDistribution> services;

  /// nu = E[a] - sum_i E[s_i].
  double drift() const noexcept;
  /// sigma^2 = Var(a) + sum_i Var(s_i).
  double variance() const noexcept;
  double total_service_mean() const noexcept;
  double min_service_mean() const noexcept;
  /// A: the largest almost-sure bound over arrivals and services.
  std::int64_t bound() const noexcept;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
  double nu = 0.0;
  double sigma2 = 0.0;
  /// nu >= -(1/2) n mu_min, the hypothesis of the perpendicular-moment bound.
  bool ssc_hypothesis = false;
};

ValidationReport validate(const SystemConfig& config);

/// Queue-length vector at the start of a slot.
struct QueueState {
  std::vector<std::int64_t> q;

  std::size_t size() const noexcept { return q.size(); }
  std::int64_t total() const noexcept;
  static QueueState empty(int n) { return {std::vector<std::int64_t>(static_cast<std::size_t>(n), 0)}; }
  friend bool operator==(const QueueState&, const QueueState&) = default;
};

/// One slot's decomposition q+ = q + a*Y - s - d + u.
struct SlotOutcome {
  std::int64_t arrivals = 0;
  std::size_t destination = 0;
  std::vector<std::int64_t> services;
  std::vector<std::int64_t> abandonments;
  std::vector<std::int64_t> unused;

  std::int64_t unused_total() const noexcept;
  std::int64_t abandonment_total() const noexcept;
  std::int64_t service_total() const noexcept;
};

BoundedDistribution distribution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BoundedDistribution& dist);

/// Reads {n, gamma, arrivals, services}. Structural problems (missing keys,
/// wrong types, impossible distribution parameters) throw ValidationError;
/// model-level problems are left for validate().
SystemConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SystemConfig& config);

SystemConfig load_config(const std::string& path);

}  // namespace jsqa

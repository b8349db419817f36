#include "jsqa/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "jsqa/errors.hpp"

namespace jsqa {

double SystemConfig::total_service_mean() const noexcept {
  double total = 0.0;
  for (const auto& s : services) total += s.mean();
  return total;
}

double SystemConfig::drift() const noexcept { return arrivals.mean() - total_service_mean(); }

double SystemConfig::variance() const noexcept {
  double total = arrivals.variance();
  for (const auto& s : services) total += s.variance();
  return total;
}

double SystemConfig::min_service_mean() const noexcept {
  if (services.empty()) return 0.0;
  double m = services.front().mean();
  for (const auto& s : services) m = std::min(m, s.mean());
  return m;
}

std::int64_t SystemConfig::bound() const noexcept {
  std::int64_t a = arrivals.bound();
  for (const auto& s : services) a = std::max(a, s.bound());
  return a;
}

ValidationReport validate(const SystemConfig& config) {
  ValidationReport report;
  if (config.n < 1) report.violations.emplace_back("n must be at least 1");
  if (!(config.gamma > 0.0 && config.gamma <= 1.0)) report.violations.emplace_back("gamma out of (0,1]");
  if (config.services.size() != static_cast<std::size_t>(std::max(config.n, 0)))
    report.violations.emplace_back("length mismatch: " + std::to_string(config.services.size()) +
                                   " service distributions for n=" + std::to_string(config.n));
  report.nu = config.drift();
  report.sigma2 = config.variance();
  if (!std::isfinite(report.nu)) report.violations.emplace_back("drift is not finite");
  if (!(report.sigma2 >= 0.0)) report.violations.emplace_back("variance is negative");
  report.ssc_hypothesis = report.nu >= -0.5 * config.n * config.min_service_mean();
  report.ok = report.violations.empty();
  return report;
}

std::int64_t QueueState::total() const noexcept { return std::accumulate(q.begin(), q.end(), std::int64_t{0}); }

std::int64_t SlotOutcome::unused_total() const noexcept {
  return std::accumulate(unused.begin(), unused.end(), std::int64_t{0});
}
std::int64_t SlotOutcome::abandonment_total() const noexcept {
  return std::accumulate(abandonments.begin(), abandonments.end(), std::int64_t{0});
}
std::int64_t SlotOutcome::service_total() const noexcept {
  return std::accumulate(services.begin(), services.end(), std::int64_t{0});
}

namespace {

template <class T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::optional<std::int64_t> optional_bound(const nlohmann::json& j) {
  if (!j.contains("bound")) return std::nullopt;
  return required<std::int64_t>(j, "bound");
}

}  // namespace

BoundedDistribution distribution_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("distribution must be a JSON object");
  try {
    const auto kind = distribution_kind_from_string(required<std::string>(j, "kind"));
    switch (kind) {
      case DistributionKind::constant:
        return BoundedDistribution::constant(required<std::int64_t>(j, "value"), optional_bound(j));
      case DistributionKind::bernoulli_scaled:
        return BoundedDistribution::bernoulli_scaled(required<std::int64_t>(j, "support_point"),
                                                     required<double>(j, "success_probability"),
                                                     optional_bound(j));
      case DistributionKind::binomial:
        return BoundedDistribution::binomial(required<std::int64_t>(j, "trial_count"),
                                             required<double>(j, "success_probability"), optional_bound(j));
    }
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  throw ValidationError("unreachable distribution kind");
}

nlohmann::json to_json(const BoundedDistribution& dist) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(dist.kind()));
  switch (dist.kind()) {
    case DistributionKind::constant: j["value"] = dist.size_parameter(); break;
    case DistributionKind::bernoulli_scaled:
      j["support_point"] = dist.size_parameter();
      j["success_probability"] = dist.success_probability();
      break;
    case DistributionKind::binomial:
      j["trial_count"] = dist.size_parameter();
      j["success_probability"] = dist.success_probability();
      break;
  }
  j["bound"] = dist.bound();
  return j;
}

SystemConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  SystemConfig c;
  c.n = required<int>(j, "n");
  c.gamma = required<double>(j, "gamma");
  if (!j.contains("arrivals")) throw ValidationError("missing key 'arrivals'");
  c.arrivals = distribution_from_json(j.at("arrivals"));
  if (!j.contains("services") || !j.at("services").is_array())
    throw ValidationError("'services' must be an array");
  for (const auto& s : j.at("services")) c.services.push_back(distribution_from_json(s));
  return c;
}

nlohmann::json to_json(const SystemConfig& config) {
  nlohmann::json j;
  j["n"] = config.n;
  j["gamma"] = config.gamma;
  j["arrivals"] = to_json(config.arrivals);
  j["services"] = nlohmann::json::array();
  for (const auto& s : config.services) j["services"].push_back(to_json(s));
  return j;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed JSON in '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

}  // namespace jsqa

#include "jsqa/regimes.hpp"

#include <cmath>

#include "jsqa/errors.hpp"

namespace jsqa {

std::string_view to_string(RegimeKind kind) noexcept {
  switch (kind) {
    case RegimeKind::classic: return "classic";
    case RegimeKind::critical: return "critical";
    case RegimeKind::overloaded: return "overloaded";
  }
  return "unknown";
}

RegimeKind regime_kind_from_string(std::string_view name) {
  if (name == "classic") return RegimeKind::classic;
  if (name == "critical") return RegimeKind::critical;
  if (name == "overloaded") return RegimeKind::overloaded;
  throw ValidationError("unknown regime kind '" + std::string(name) + "'");
}

namespace {

std::string_view to_string(ArrivalFamily f) noexcept {
  return f == ArrivalFamily::binomial ? "binomial" : "bernoulli-scaled";
}

ArrivalFamily arrival_family_from_string(std::string_view name) {
  if (name == "binomial") return ArrivalFamily::binomial;
  if (name == "bernoulli-scaled") return ArrivalFamily::bernoulli_scaled;
  throw ValidationError("unknown arrival family '" + std::string(name) + "'");
}

double arrival_variance(ArrivalFamily family, double lambda, double bound) {
  return family == ArrivalFamily::binomial ? lambda * (1.0 - lambda / bound) : lambda * (bound - lambda);
}

}  // namespace

double RegimeSpec::service_mean() const noexcept {
  double m = 0.0;
  for (const auto& s : base_services) m += s.mean();
  return m;
}

void RegimeSpec::validate() const {
  if (base_services.empty()) throw ValidationError("regime needs at least one service distribution");
  if (!std::isfinite(constant)) throw ValidationError("regime constant must be finite");
  switch (kind) {
    case RegimeKind::classic:
      if (!(constant > 0.0)) throw ValidationError("classic regime needs constant > 0");
      if (!(alpha > 0.0 && alpha < 0.5)) throw ValidationError("classic regime needs 0 < alpha < 1/2");
      break;
    case RegimeKind::critical:
      if (alpha != 0.5) throw ValidationError("critical regime needs alpha = 1/2");
      break;
    case RegimeKind::overloaded:
      if (!(constant > 0.0)) throw ValidationError("overloaded regime needs constant > 0");
      if (!(alpha >= 0.0 && alpha < 0.5)) throw ValidationError("overloaded regime needs 0 <= alpha < 1/2");
      break;
  }
  if (bound < 1) throw ValidationError("bound must be positive");
  for (const auto& s : base_services)
    if (s.support_max() > bound) throw ValidationError("service support exceeds the bound");
}

RegimeSpec regime_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("regime must be a JSON object");
  RegimeSpec spec;
  try {
    spec.kind = regime_kind_from_string(j.at("kind").get<std::string>());
    spec.constant = j.at("constant").get<double>();
    spec.alpha = j.contains("alpha") ? j.at("alpha").get<double>() : (spec.kind == RegimeKind::critical ? 0.5 : -1.0);
    spec.bound = j.at("bound").get<std::int64_t>();
    if (!j.at("base_services").is_array()) throw ValidationError("'base_services' must be an array");
    for (const auto& s : j.at("base_services")) spec.base_services.push_back(distribution_from_json(s));
    if (j.contains("arrival_family"))
      spec.arrival_family = arrival_family_from_string(j.at("arrival_family").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad regime: ") + e.what());
  }
  spec.validate();
  return spec;
}

nlohmann::json to_json(const RegimeSpec& spec) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["constant"] = spec.constant;
  j["alpha"] = spec.alpha;
  j["bound"] = spec.bound;
  j["arrival_family"] = std::string(to_string(spec.arrival_family));
  j["base_services"] = nlohmann::json::array();
  for (const auto& s : spec.base_services) j["base_services"].push_back(to_json(s));
  return j;
}

double regime_drift(const RegimeSpec& spec, double gamma) {
  switch (spec.kind) {
    case RegimeKind::classic: return -spec.constant * std::pow(gamma, spec.alpha);
    case RegimeKind::critical: return spec.constant * std::sqrt(gamma);
    case RegimeKind::overloaded: return spec.constant * std::pow(gamma, spec.alpha);
  }
  return 0.0;
}

SystemConfig build_config(const RegimeSpec& spec, double gamma) {
  spec.validate();
  if (!(gamma > 0.0 && gamma < 1.0)) throw OutOfRangeError("gamma must lie in (0,1)");
  const double mu = spec.service_mean();
  const double lambda = regime_drift(spec, gamma) + mu;
  const auto A = static_cast<double>(spec.bound);
  if (!(lambda > 0.0 && lambda <= A))
    throw OutOfRangeError("arrival mean " + std::to_string(lambda) + " outside (0, " + std::to_string(spec.bound) +
                          "] at gamma=" + std::to_string(gamma));
  SystemConfig c;
  c.n = spec.n();
  c.gamma = gamma;
  const double p = lambda / A;
  c.arrivals = spec.arrival_family == ArrivalFamily::binomial
                   ? BoundedDistribution::binomial(spec.bound, p)
                   : BoundedDistribution::bernoulli_scaled(spec.bound, p);
  for (const auto& s : spec.base_services) c.services.push_back(s.with_bound(spec.bound));
  return c;
}

double scale_factor(const RegimeSpec& spec, double gamma) {
  return spec.kind == RegimeKind::classic ? std::pow(gamma, spec.alpha) : std::sqrt(gamma);
}

double centering(const RegimeSpec& spec, double gamma) {
  if (spec.kind != RegimeKind::overloaded) return 0.0;
  return regime_drift(spec, gamma) / (static_cast<double>(spec.n()) * gamma);
}

ScaledSampleSet::ScaledSampleSet(int n, std::vector<double> x, std::vector<std::size_t> offsets)
    : n_(n), x_(std::move(x)), offsets_(std::move(offsets)) {
  if (n_ < 1 || x_.size() % static_cast<std::size_t>(n_) != 0) throw DimensionError("scaled data has wrong shape");
  totals_.resize(size());
  for (std::size_t i = 0; i < totals_.size(); ++i) {
    double t = 0.0;
    for (double v : this->x(i)) t += v;
    totals_[i] = t;
  }
}

ScaledSample ScaledSampleSet::at(std::size_t i) const {
  if (i >= size()) throw OutOfRangeError("sample index out of range");
  const auto row = x(i);
  return {std::vector<double>(row.begin(), row.end()), totals_[i]};
}

std::vector<double> ScaledSampleSet::column(std::size_t k) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = coordinate(i, k);
  return out;
}

ScaledSample scale(std::span<const std::int64_t> q, const RegimeSpec& spec, double gamma) {
  const double f = scale_factor(spec, gamma);
  const double c = centering(spec, gamma);
  ScaledSample s;
  s.x.reserve(q.size());
  for (auto v : q) {
    s.x.push_back(f * (static_cast<double>(v) - c));
    s.x_total += s.x.back();
  }
  return s;
}

ScaledSampleSet scale(const SampleSet& samples, const RegimeSpec& spec, double gamma) {
  if (samples.n() != spec.n()) throw DimensionError("sample dimension does not match regime");
  const double f = scale_factor(spec, gamma);
  const double c = centering(spec, gamma);
  std::vector<double> x;
  x.reserve(samples.size() * static_cast<std::size_t>(samples.n()));
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (auto v : samples.q(i)) x.push_back(f * (static_cast<double>(v) - c));
  const auto off = samples.replica_offsets();
  return ScaledSampleSet(samples.n(), std::move(x), std::vector<std::size_t>(off.begin(), off.end()));
}

std::vector<std::int64_t> unscale(const ScaledSample& sample, const RegimeSpec& spec, double gamma) {
  const double f = scale_factor(spec, gamma);
  const double c = centering(spec, gamma);
  std::vector<std::int64_t> q;
  q.reserve(sample.x.size());
  for (double v : sample.x) q.push_back(static_cast<std::int64_t>(std::llround(v / f + c)));
  return q;
}

LimitVariance limit_sigma2(const RegimeSpec& spec) {
  spec.validate();
  double lim_nu = 0.0;
  if (spec.kind == RegimeKind::overloaded && spec.alpha == 0.0) lim_nu = spec.constant;
  const double lambda = spec.service_mean() + lim_nu;
  double sigma2 = arrival_variance(spec.arrival_family, lambda, static_cast<double>(spec.bound));
  for (const auto& s : spec.base_services) sigma2 += s.variance();
  return {sigma2, sigma2 + lim_nu};
}

}  // namespace jsqa

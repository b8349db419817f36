#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "jsqa/config.hpp"
#include "jsqa/simulator.hpp"

namespace jsqa {

enum class RegimeKind { classic, critical, overloaded };

std::string_view to_string(RegimeKind kind) noexcept;
RegimeKind regime_kind_from_string(std::string_view name);

/// Family used for the arrival law once the target mean lambda is known.
/// binomial(A, lambda/A) has variance lambda(1 - lambda/A);
/// bernoulli-scaled(A, lambda/A) has variance lambda(A - lambda).
enum class ArrivalFamily { binomial, bernoulli_scaled };

/// One-parameter family of systems indexed by gamma. The drift is placed
/// exactly on the regime curve:
///   classic     nu = -C gamma^alpha,  C > 0, 0 < alpha < 1/2
///   critical    nu =  C sqrt(gamma),  alpha = 1/2
///   overloaded  nu =  C gamma^alpha,  C > 0, 0 <= alpha < 1/2
/// Services stay fixed; only the arrival mean moves with gamma.
struct RegimeSpec {
  RegimeKind kind = RegimeKind::critical;
  double constant = 0.0;
  double alpha = 0.5;
  std::vector<BoundedDistribution> base_services;
  std::int64_t bound = 1;
  ArrivalFamily arrival_family = ArrivalFamily::binomial;

  int n() const noexcept { return static_cast<int>(base_services.size()); }
  double service_mean() const noexcept;
  /// Throws ValidationError on constant/alpha/bound violations.
  void validate() const;
};

RegimeSpec regime_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RegimeSpec& spec);

/// nu_gamma on the regime curve.
double regime_drift(const RegimeSpec& spec, double gamma);

/// Throws OutOfRangeError when gamma is outside (0,1) or lambda = nu + sum mu
/// falls outside (0, A].
SystemConfig build_config(const RegimeSpec& spec, double gamma);

/// gamma^alpha for classic, sqrt(gamma) otherwise.
double scale_factor(const RegimeSpec& spec, double gamma);
/// Per-queue centering nu/(n gamma) for overloaded, zero otherwise.
double centering(const RegimeSpec& spec, double gamma);

struct ScaledSample {
  std::vector<double> x;
  double x_total = 0.0;
};

/// Scaled coordinates of a whole sample set, flat and replica-aware.
class ScaledSampleSet {
 public:
  ScaledSampleSet() = default;
  ScaledSampleSet(int n, std::vector<double> x, std::vector<std::size_t> offsets);

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return n_ > 0 ? x_.size() / static_cast<std::size_t>(n_) : 0; }
  std::span<const double> x(std::size_t i) const noexcept {
    return {x_.data() + i * static_cast<std::size_t>(n_), static_cast<std::size_t>(n_)};
  }
  double coordinate(std::size_t i, std::size_t k) const noexcept { return x_[i * static_cast<std::size_t>(n_) + k]; }
  double total(std::size_t i) const noexcept { return totals_[i]; }
  ScaledSample at(std::size_t i) const;
  /// Every value of coordinate k, in sample order.
  std::vector<double> column(std::size_t k) const;
  std::span<const double> totals() const noexcept { return totals_; }
  std::span<const std::size_t> replica_offsets() const noexcept { return offsets_; }
  BatchLayout batches(std::size_t per_replica = BatchLayout::kDefaultBatchesPerReplica) const {
    return BatchLayout::for_replicas(offsets_, per_replica);
  }

 private:
  int n_ = 0;
  std::vector<double> x_;
  std::vector<double> totals_;
  std::vector<std::size_t> offsets_{0};
};

ScaledSample scale(std::span<const std::int64_t> q, const RegimeSpec& spec, double gamma);
ScaledSampleSet scale(const SampleSet& samples, const RegimeSpec& spec, double gamma);
/// Inverse of scale; rounds to the nearest integer queue length.
std::vector<std::int64_t> unscale(const ScaledSample& sample, const RegimeSpec& spec, double gamma);

struct LimitVariance {
  double sigma2 = 0.0;
  double bar_sigma2 = 0.0;
};

/// sigma^2 and bar sigma^2 of the gamma -> 0 system. lambda tends to
/// sum mu, plus C for overloaded with alpha = 0, which is also the only case
/// where bar sigma^2 exceeds sigma^2.
LimitVariance limit_sigma2(const RegimeSpec& spec);

}  // namespace jsqa

#pragma once

#include <string_view>

#include "jsqa/regimes.hpp"

namespace jsqa {

enum class LimitKind { exponential, truncated_gaussian, gaussian };

std::string_view to_string(LimitKind kind) noexcept;

/// Standard normal CDF and its logarithm, accurate deep into the left tail.
double normal_cdf(double x) noexcept;
double log_normal_cdf(double x) noexcept;

/// Scalar limit law of a scaled queue coordinate or total.
///
///   exponential(m)            mean m
///   truncated_gaussian(mu, v) N(mu, v) conditioned on being positive
///   gaussian(v)               N(0, v)
///
/// The truncated Gaussian keeps its underlying (mu, v), not its own moments.
class LimitDistribution {
 public:
  static LimitDistribution exponential(double mean);
  static LimitDistribution truncated_gaussian(double underlying_mean, double underlying_variance);
  static LimitDistribution gaussian(double variance);

  LimitKind kind() const noexcept { return kind_; }
  /// m, mu or 0 depending on kind.
  double location() const noexcept { return location_; }
  /// 0, v or v depending on kind.
  double variance_parameter() const noexcept { return variance_; }

  double pdf(double x) const noexcept;
  double cdf(double x) const noexcept;
  /// E[exp(phi X)]. DomainError for exponential when phi >= 1/m.
  double mgf(double phi) const;
  double mgf_derivative(double phi) const;
  /// E[X^m], m >= 1. Truncated Gaussian by quadrature at 1e-8 relative.
  double moment(int m) const;
  double mean() const;
  double variance() const;

  /// Law of c X for c > 0.
  LimitDistribution scaled(double c) const;

 private:
  LimitDistribution(LimitKind kind, double location, double variance) noexcept
      : kind_(kind), location_(location), variance_(variance) {}

  LimitKind kind_;
  double location_;
  double variance_;
};

struct RegimeLimit {
  LimitDistribution coordinate;
  LimitDistribution total;
};

/// Per-coordinate limit and its n-fold scaling for the scaled total:
///   classic     Exp(sigma^2/(2 n C))
///   critical    TG(C/n, sigma^2/(2 n^2))
///   overloaded  N(0, bar sigma^2/(2 n^2))
RegimeLimit limit_for_regime(const RegimeSpec& spec);

/// Limit of E[sum u]/sqrt(gamma) in the critical regime:
/// 1 / integral_{-inf}^0 exp(-s^2 sigma^2/4 - C s) ds.
double critical_unused_limit(double c_c, double sigma2);

}  // namespace jsqa

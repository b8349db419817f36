#include "jsqa/limits.hpp"

#include <cmath>
#include <numbers>

#include "jsqa/errors.hpp"
#include "jsqa/quadrature.hpp"

namespace jsqa {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double double_factorial(int k) noexcept {
  double r = 1.0;
  for (int j = k; j > 1; j -= 2) r *= j;
  return r;
}

}  // namespace

std::string_view to_string(LimitKind kind) noexcept {
  switch (kind) {
    case LimitKind::exponential: return "exponential";
    case LimitKind::truncated_gaussian: return "truncated-gaussian";
    case LimitKind::gaussian: return "gaussian";
  }
  return "unknown";
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x * kInvSqrt2); }

double log_normal_cdf(double x) noexcept {
  if (x > -30.0) return std::log(normal_cdf(x));
  // Mills-ratio asymptotics; erfc underflows below about -38.
  const double t = 1.0 / (x * x);
  return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-t * (1.0 - 3.0 * t * (1.0 - 5.0 * t)));
}

LimitDistribution LimitDistribution::exponential(double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) throw DomainError("exponential mean must be positive");
  return {LimitKind::exponential, mean, 0.0};
}

LimitDistribution LimitDistribution::truncated_gaussian(double mu, double v) {
  if (!(v > 0.0) || !std::isfinite(v) || !std::isfinite(mu))
    throw DomainError("truncated Gaussian needs finite mean and positive variance");
  return {LimitKind::truncated_gaussian, mu, v};
}

LimitDistribution LimitDistribution::gaussian(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("Gaussian variance must be positive");
  return {LimitKind::gaussian, 0.0, v};
}

double LimitDistribution::pdf(double x) const noexcept {
  switch (kind_) {
    case LimitKind::exponential: return x < 0.0 ? 0.0 : std::exp(-x / location_) / location_;
    case LimitKind::gaussian: {
      const double s = std::sqrt(variance_);
      return normal_pdf(x / s) / s;
    }
    case LimitKind::truncated_gaussian: {
      if (x < 0.0) return 0.0;
      const double s = std::sqrt(variance_);
      const double z = (x - location_) / s;
      return std::exp(-0.5 * z * z - log_normal_cdf(location_ / s)) * kInvSqrt2Pi / s;
    }
  }
  return 0.0;
}

double LimitDistribution::cdf(double x) const noexcept {
  switch (kind_) {
    case LimitKind::exponential: return x <= 0.0 ? 0.0 : -std::expm1(-x / location_);
    case LimitKind::gaussian: return normal_cdf(x / std::sqrt(variance_));
    case LimitKind::truncated_gaussian: {
      if (x <= 0.0) return 0.0;
      const double s = std::sqrt(variance_);
      // 1 - P(Z > x)/P(Z > 0), both tails via the left-tail CDF.
      const double tail = std::exp(log_normal_cdf((location_ - x) / s) - log_normal_cdf(location_ / s));
      return std::max(0.0, 1.0 - tail);
    }
  }
  return 0.0;
}

double LimitDistribution::mgf(double phi) const {
  switch (kind_) {
    case LimitKind::exponential:
      if (phi * location_ >= 1.0) throw DomainError("exponential MGF diverges for phi >= 1/mean");
      return 1.0 / (1.0 - phi * location_);
    case LimitKind::gaussian: return std::exp(0.5 * variance_ * phi * phi);
    case LimitKind::truncated_gaussian: {
      const double s = std::sqrt(variance_);
      const double shift = location_ + variance_ * phi;
      return std::exp(location_ * phi + 0.5 * variance_ * phi * phi + log_normal_cdf(shift / s) -
                      log_normal_cdf(location_ / s));
    }
  }
  return 0.0;
}

double LimitDistribution::mgf_derivative(double phi) const {
  switch (kind_) {
    case LimitKind::exponential: {
      if (phi * location_ >= 1.0) throw DomainError("exponential MGF diverges for phi >= 1/mean");
      const double d = 1.0 - phi * location_;
      return location_ / (d * d);
    }
    case LimitKind::gaussian: return variance_ * phi * mgf(phi);
    case LimitKind::truncated_gaussian: {
      // M' = (mu + v phi) M + s pdf(c)/Phi(c), the last term independent of phi.
      const double s = std::sqrt(variance_);
      const double c = location_ / s;
      const double hazard = std::exp(-0.5 * c * c - log_normal_cdf(c)) * kInvSqrt2Pi;
      return (location_ + variance_ * phi) * mgf(phi) + s * hazard;
    }
  }
  return 0.0;
}

double LimitDistribution::moment(int m) const {
  if (m < 1) throw DomainError("moment order must be at least 1");
  switch (kind_) {
    case LimitKind::exponential: return std::tgamma(m + 1.0) * std::pow(location_, m);
    case LimitKind::gaussian: return m % 2 ? 0.0 : double_factorial(m - 1) * std::pow(variance_, 0.5 * m);
    case LimitKind::truncated_gaussian: {
      const double s = std::sqrt(variance_);
      const double hi = std::max(location_, 0.0) + 40.0 * s;
      const double peak = std::max(location_, 0.0);
      QuadratureOptions opt;
      opt.rel_tol = 1e-10;
      auto f = [&](double x) { return std::pow(x, m) * pdf(x); };
      // Split at the mode so the adaptive rule sees the bulk at once.
      const auto a = integrate(f, 0.0, peak, opt);
      const auto b = integrate(f, peak, hi, opt);
      if (!a.converged || !b.converged) throw ConvergenceError("truncated Gaussian moment quadrature failed");
      return a.value + b.value;
    }
  }
  return 0.0;
}

double LimitDistribution::mean() const {
  if (kind_ == LimitKind::truncated_gaussian) {
    const double s = std::sqrt(variance_);
    const double c = location_ / s;
    return location_ + s * std::exp(-0.5 * c * c - log_normal_cdf(c)) * kInvSqrt2Pi;
  }
  return moment(1);
}

double LimitDistribution::variance() const {
  switch (kind_) {
    case LimitKind::exponential: return location_ * location_;
    case LimitKind::gaussian: return variance_;
    case LimitKind::truncated_gaussian: {
      const double s = std::sqrt(variance_);
      const double c = location_ / s;
      const double h = std::exp(-0.5 * c * c - log_normal_cdf(c)) * kInvSqrt2Pi;
      return variance_ * (1.0 - c * h - h * h);
    }
  }
  return 0.0;
}

LimitDistribution LimitDistribution::scaled(double c) const {
  if (!(c > 0.0)) throw DomainError("scale factor must be positive");
  switch (kind_) {
    case LimitKind::exponential: return exponential(c * location_);
    case LimitKind::gaussian: return gaussian(c * c * variance_);
    case LimitKind::truncated_gaussian: return truncated_gaussian(c * location_, c * c * variance_);
  }
  return *this;
}

RegimeLimit limit_for_regime(const RegimeSpec& spec) {
  const auto [sigma2, bar_sigma2] = limit_sigma2(spec);
  const double n = spec.n();
  switch (spec.kind) {
    case RegimeKind::classic: {
      const auto coord = LimitDistribution::exponential(sigma2 / (2.0 * n * spec.constant));
      return {coord, coord.scaled(n)};
    }
    case RegimeKind::critical: {
      const auto coord = LimitDistribution::truncated_gaussian(spec.constant / n, sigma2 / (2.0 * n * n));
      return {coord, coord.scaled(n)};
    }
    case RegimeKind::overloaded: {
      const auto coord = LimitDistribution::gaussian(bar_sigma2 / (2.0 * n * n));
      return {coord, coord.scaled(n)};
    }
  }
  throw RegimeMismatchError("unknown regime");
}

double critical_unused_limit(double c_c, double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
  // Completing the square: the integral is sqrt(pi/a) exp(C^2/(4a)) Phi(C/sqrt(2a)), a = sigma2/4.
  const double a = 0.25 * sigma2;
  const double log_integral =
      0.5 * std::log(std::numbers::pi / a) + c_c * c_c / (4.0 * a) + log_normal_cdf(c_c / std::sqrt(2.0 * a));
  return std::exp(-log_integral);
}

}  // namespace jsqa

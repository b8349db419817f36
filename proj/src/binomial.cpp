#include "jsqa/binomial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace jsqa {

namespace {

constexpr std::int64_t kTableSize = 1024;
constexpr double kInversionMean = 10.0;

const std::array<double, kTableSize>& log_factorial_table() {
  static const std::array<double, kTableSize> table = [] {
    std::array<double, kTableSize> t{};
    for (std::int64_t k = 0; k < kTableSize; ++k) t[k] = std::lgamma(static_cast<double>(k) + 1.0);
    return t;
  }();
  return table;
}

// Sequential search from zero. p0 = (1-p)^trials, odds = p/(1-p).
std::int64_t invert_from_zero(std::int64_t trials, double odds, double p0, double u) {
  double mass = p0;
  double cdf = p0;
  std::int64_t k = 0;
  while (u >= cdf && k < trials) {
    mass *= odds * static_cast<double>(trials - k) / static_cast<double>(k + 1);
    ++k;
    cdf += mass;
  }
  return k;
}

// BTRS (Hormann 1993), valid for trials*p >= 10 and p <= 1/2.
std::int64_t btrs(std::int64_t trials, double p, RngStream& rng) {
  const double n = static_cast<double>(trials);
  const double q = 1.0 - p;
  const double spq = std::sqrt(n * p * q);
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = n * p + 0.5;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double v_r = 0.92 - 4.2 / b;
  const double log_odds = std::log(p / q);
  const auto mode = static_cast<std::int64_t>(std::floor((n + 1.0) * p));
  const double h = log_factorial(mode) + log_factorial(trials - mode);

  while (true) {
    const double u = rng.uniform() - 0.5;
    double v = rng.uniform_open();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + c);
    if (kf < 0.0 || kf > n) continue;
    const auto k = static_cast<std::int64_t>(kf);
    if (us >= 0.07 && v <= v_r) return k;
    v = std::log(v * alpha / (a / (us * us) + b));
    const double bound =
        h - log_factorial(k) - log_factorial(trials - k) + static_cast<double>(k - mode) * log_odds;
    if (v <= bound) return k;
  }
}

}  // namespace

double log_factorial(std::int64_t k) noexcept {
  if (k < kTableSize) return log_factorial_table()[static_cast<std::size_t>(k)];
  const double x = static_cast<double>(k);
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return (x + 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

std::int64_t sample_binomial(std::int64_t trials, double p, RngStream& rng) {
  if (trials <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  const bool flip = p > 0.5;
  const double sp = flip ? 1.0 - p : p;
  std::int64_t k;
  if (static_cast<double>(trials) * sp < kInversionMean) {
    const double p0 = std::exp(static_cast<double>(trials) * std::log1p(-sp));
    k = invert_from_zero(trials, sp / (1.0 - sp), p0, rng.uniform());
  } else {
    k = btrs(trials, sp, rng);
  }
  return flip ? trials - k : k;
}

FixedProbabilityBinomial::FixedProbabilityBinomial(double p)
    : p_(p),
      small_p_(std::min(p, 1.0 - p)),
      odds_(small_p_ < 1.0 ? small_p_ / (1.0 - small_p_) : 0.0),
      flipped_(p > 0.5),
      log_q_(std::log1p(-small_p_)),
      inversion_limit_(0) {
  if (small_p_ > 0.0) {
    // Largest trial count still handled by inversion.
    inversion_limit_ = static_cast<std::int64_t>(std::ceil(kInversionMean / small_p_)) - 1;
    while (inversion_limit_ > 0 && static_cast<double>(inversion_limit_) * small_p_ >= kInversionMean)
      --inversion_limit_;
  }
}

std::int64_t FixedProbabilityBinomial::invert(std::int64_t trials, double u) {
  const auto idx = static_cast<std::size_t>(trials);
  if (idx >= zero_mass_.size()) {
    const std::size_t old = zero_mass_.size();
    zero_mass_.resize(std::max(idx + 1, 2 * old));
    for (std::size_t k = old; k < zero_mass_.size(); ++k)
      zero_mass_[k] = std::exp(static_cast<double>(k) * log_q_);
  }
  const double p0 = zero_mass_[idx];
  if (u < p0) return 0;
  return invert_from_zero(trials, odds_, p0, u);
}

std::int64_t FixedProbabilityBinomial::operator()(std::int64_t trials, RngStream& rng) {
  if (trials <= 0 || p_ <= 0.0) return 0;
  if (p_ >= 1.0) return trials;
  std::int64_t k;
  if (trials <= inversion_limit_) {
    k = invert(trials, rng.uniform());
  } else {
    k = btrs(trials, small_p_, rng);
  }
  return flipped_ ? trials - k : k;
}

}  // namespace jsqa

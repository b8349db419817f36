#include "jsqa/distribution.hpp"

#include <cmath>
#include <stdexcept>

#include "jsqa/binomial.hpp"

namespace jsqa {

namespace {

constexpr std::int64_t kMaxTabulated = 256;

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("success probability must lie in [0, 1]");
}

std::int64_t resolve_bound(std::int64_t support_max, std::optional<std::int64_t> bound) {
  const std::int64_t b = bound.value_or(support_max);
  if (b < support_max)
    throw std::invalid_argument("bound " + std::to_string(b) + " is below the support maximum " +
                                std::to_string(support_max));
  return b;
}

}  // namespace

std::string_view to_string(DistributionKind kind) noexcept {
  switch (kind) {
    case DistributionKind::constant: return "constant";
    case DistributionKind::bernoulli_scaled: return "bernoulli-scaled";
    case DistributionKind::binomial: return "binomial";
  }
  return "unknown";
}

DistributionKind distribution_kind_from_string(std::string_view name) {
  if (name == "constant") return DistributionKind::constant;
  if (name == "bernoulli-scaled") return DistributionKind::bernoulli_scaled;
  if (name == "binomial") return DistributionKind::binomial;
  throw std::invalid_argument("unknown distribution kind '" + std::string(name) + "'");
}

BoundedDistribution::BoundedDistribution(DistributionKind kind, std::int64_t size, double p,
                                         std::int64_t bound)
    : kind_(kind), size_(size), p_(p), bound_(bound) {
  if (size_ > 0 && size_ <= kMaxTabulated) {
    cdf_.resize(static_cast<std::size_t>(size_) + 1);
    double acc = 0.0;
    for (std::int64_t k = 0; k <= size_; ++k) {
      acc += pmf(k);
      cdf_[static_cast<std::size_t>(k)] = acc;
    }
  }
}

BoundedDistribution BoundedDistribution::constant(std::int64_t value, std::optional<std::int64_t> bound) {
  if (value < 0) throw std::invalid_argument("constant value must be non-negative");
  return {DistributionKind::constant, value, 0.0, resolve_bound(value, bound)};
}

BoundedDistribution BoundedDistribution::bernoulli_scaled(std::int64_t support_point, double p,
                                                          std::optional<std::int64_t> bound) {
  if (support_point < 0) throw std::invalid_argument("support point must be non-negative");
  check_probability(p);
  return {DistributionKind::bernoulli_scaled, support_point, p, resolve_bound(support_point, bound)};
}

BoundedDistribution BoundedDistribution::binomial(std::int64_t trial_count, double p,
                                                  std::optional<std::int64_t> bound) {
  if (trial_count < 0) throw std::invalid_argument("trial count must be non-negative");
  check_probability(p);
  return {DistributionKind::binomial, trial_count, p, resolve_bound(trial_count, bound)};
}

BoundedDistribution BoundedDistribution::with_bound(std::int64_t bound) const {
  return {kind_, size_, p_, resolve_bound(size_, bound)};
}

double BoundedDistribution::mean() const noexcept {
  const double s = static_cast<double>(size_);
  switch (kind_) {
    case DistributionKind::constant: return s;
    case DistributionKind::bernoulli_scaled:
    case DistributionKind::binomial: return s * p_;
  }
  return 0.0;
}

double BoundedDistribution::variance() const noexcept {
  const double s = static_cast<double>(size_);
  switch (kind_) {
    case DistributionKind::constant: return 0.0;
    case DistributionKind::bernoulli_scaled: return s * s * p_ * (1.0 - p_);
    case DistributionKind::binomial: return s * p_ * (1.0 - p_);
  }
  return 0.0;
}

double BoundedDistribution::pmf(std::int64_t k) const noexcept {
  if (k < 0 || k > size_) return 0.0;
  switch (kind_) {
    case DistributionKind::constant: return k == size_ ? 1.0 : 0.0;
    case DistributionKind::bernoulli_scaled:
      if (size_ == 0) return 1.0;
      if (k == size_) return p_;
      return k == 0 ? 1.0 - p_ : 0.0;
    case DistributionKind::binomial: {
      if (p_ == 0.0) return k == 0 ? 1.0 : 0.0;
      if (p_ == 1.0) return k == size_ ? 1.0 : 0.0;
      const double log_choose = log_factorial(size_) - log_factorial(k) - log_factorial(size_ - k);
      return std::exp(log_choose + static_cast<double>(k) * std::log(p_) +
                      static_cast<double>(size_ - k) * std::log1p(-p_));
    }
  }
  return 0.0;
}

std::int64_t BoundedDistribution::sample(RngStream& rng) const {
  if (size_ == 0 || kind_ == DistributionKind::constant) return size_;
  if (kind_ == DistributionKind::bernoulli_scaled) return rng.uniform() < p_ ? size_ : 0;
  if (cdf_.empty()) return sample_binomial(size_, p_, rng);
  const double u = rng.uniform();
  std::int64_t k = 0;
  while (k < size_ && u >= cdf_[static_cast<std::size_t>(k)]) ++k;
  return k;
}

}  // namespace jsqa

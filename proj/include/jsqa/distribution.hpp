#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jsqa/rng.hpp"

namespace jsqa {

enum class DistributionKind { constant, bernoulli_scaled, binomial };

std::string_view to_string(DistributionKind kind) noexcept;
DistributionKind distribution_kind_from_string(std::string_view name);

/// Integer-valued law on [0, bound] with exact analytic moments.
///
///   constant(v)            -> v with probability one
///   bernoulli_scaled(x, p) -> x with probability p, else 0
///   binomial(m, p)         -> Binomial(m, p)
///
/// The bound A may exceed the support maximum; it is the almost-sure bound
/// used by the model. Factories throw std::invalid_argument when the
/// parameters violate the family's constraints.
class BoundedDistribution {
 public:
  static BoundedDistribution constant(std::int64_t value, std::optional<std::int64_t> bound = {});
  static BoundedDistribution bernoulli_scaled(std::int64_t support_point, double success_probability,
                                              std::optional<std::int64_t> bound = {});
  static BoundedDistribution binomial(std::int64_t trial_count, double success_probability,
                                      std::optional<std::int64_t> bound = {});

  DistributionKind kind() const noexcept { return kind_; }
  std::int64_t bound() const noexcept { return bound_; }
  /// value / support point / trial count, depending on the family.
  std::int64_t size_parameter() const noexcept { return size_; }
  /// Zero for constant.
  double success_probability() const noexcept { return p_; }
  std::int64_t support_max() const noexcept { return size_; }

  double mean() const noexcept;
  double variance() const noexcept;
  double pmf(std::int64_t k) const noexcept;

  std::int64_t sample(RngStream& rng) const;

  /// Same family and parameters with a different almost-sure bound.
  BoundedDistribution with_bound(std::int64_t bound) const;

  friend bool operator==(const BoundedDistribution& a, const BoundedDistribution& b) noexcept {
    return a.kind_ == b.kind_ && a.size_ == b.size_ && a.p_ == b.p_ && a.bound_ == b.bound_;
  }

 private:
  BoundedDistribution(DistributionKind kind, std::int64_t size, double p, std::int64_t bound);

  DistributionKind kind_;
  std::int64_t size_;
  double p_;
  std::int64_t bound_;
  // Cumulative table over [0, size] when the support is small enough.
  std::vector<double> cdf_;
};

inline std::int64_t sample(const BoundedDistribution& dist, RngStream& rng) { return dist.sample(rng); }

}  // namespace jsqa

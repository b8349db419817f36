#pragma once

#include <cstdint>
#include <vector>

#include "jsqa/rng.hpp"

namespace jsqa {

/// log(k!) without touching the global state that std::lgamma may write.
double log_factorial(std::int64_t k) noexcept;

/// Exact Binomial(trials, p) draw. Inversion when trials*min(p,1-p) < 10,
/// otherwise Hormann's BTRS transformed rejection. Never approximates, so the
/// result always lies in [0, trials].
std::int64_t sample_binomial(std::int64_t trials, double p, RngStream& rng);

/// Binomial sampler for a fixed success probability and varying trial
/// counts, as needed for per-slot abandonments Bin(q, gamma). Caches
/// (1-p)^k per trial count on first use; the cache is filled lazily and each
/// entry is computed independently, so draws match sample_binomial exactly.
class FixedProbabilityBinomial {
 public:
  explicit FixedProbabilityBinomial(double p);

  double probability() const noexcept { return p_; }
  std::int64_t operator()(std::int64_t trials, RngStream& rng);

 private:
  std::int64_t invert(std::int64_t trials, double u);

  double p_;
  double small_p_;  // min(p, 1 - p)
  double odds_;     // small_p / (1 - small_p)
  bool flipped_;
  double log_q_;    // log1p(-small_p)
  std::int64_t inversion_limit_;
  std::vector<double> zero_mass_;
};

}  // namespace jsqa

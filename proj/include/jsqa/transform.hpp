#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jsqa/config.hpp"
#include "jsqa/limits.hpp"
#include "jsqa/regimes.hpp"
#include "jsqa/simulator.hpp"

namespace jsqa {

enum class MgfStatistic { per_queue, total, centered_total };

std::string_view to_string(MgfStatistic s) noexcept;

struct MgfOptions {
  /// X is multiplied by gamma^scale_exponent before exponentiation.
  double scale_exponent = 0.5;
  /// Queue index for per_queue.
  std::size_t queue = 0;
  /// Drift nu; centered_total uses sum q - nu/gamma.
  double drift = 0.0;
  std::size_t batches_per_replica = BatchLayout::kDefaultBatchesPerReplica;
  /// A grid point is unusable if some exponent exceeds this, or if its
  /// relative standard error exceeds max_relative_stderr.
  double max_exponent = 700.0;
  double max_relative_stderr = 0.1;
};

/// 33 equispaced points on [-1, 0.5].
std::vector<double> default_phi_grid();

/// Empirical E[exp(phi Y)] and E[Y exp(phi Y)] with Y = gamma^e X, plus the
/// per-batch averages needed to propagate errors into derived quantities.
struct MgfEstimate {
  MgfStatistic statistic = MgfStatistic::total;
  double gamma = 1.0;
  double scale_exponent = 0.5;
  double scale = 1.0;
  std::vector<double> phi_grid;
  std::vector<double> values;
  std::vector<double> derivatives;
  std::vector<double> std_error;
  std::vector<double> derivative_std_error;
  std::vector<bool> usable;
  double mean_unused = 0.0;
  double mean_unused_std_error = 0.0;

  // Batch averages, row-major [batch][phi].
  std::size_t batch_count = 0;
  std::vector<double> batch_values;
  std::vector<double> batch_derivatives;
  std::vector<double> batch_unused;

  std::size_t size() const noexcept { return phi_grid.size(); }
};

MgfEstimate empirical_mgf(const SampleSet& samples, double gamma, std::span<const double> phi_grid,
                          MgfStatistic statistic, const MgfOptions& options = {});

struct Residual {
  std::vector<double> phi;
  std::vector<double> value;
  std::vector<double> std_error;
  std::vector<bool> usable;

  /// Largest |value|/std_error over usable points (0 when none is usable).
  double max_abs_z() const noexcept;
};

/// Pointwise forms of the three transform identities; each vanishes when
/// the exact limit is substituted.
///   classic:    (k + phi w/2) M - k,          k = nu/gamma^alpha, w = sigma^2 + nu^2
///   critical:   -M (phi w/2 + k) + M' - u,    k = nu/sqrt(gamma), u = E[sum u]/sqrt(gamma)
///   overloaded: phi b M/2 - M',               b = sigma^2 + nu(1 - gamma)
double classic_identity(double phi, double m, double k, double w) noexcept;
double critical_identity(double phi, double m, double dm, double k, double w, double u) noexcept;
double overloaded_identity(double phi, double m, double dm, double b) noexcept;

/// Requires a classic spec and an MGF of the total with exponent alpha.
Residual classic_residual(const MgfEstimate& mgf, const SystemConfig& config, const RegimeSpec& spec);
/// Requires an MGF of the total with exponent 1/2.
Residual critical_ode_residual(const MgfEstimate& mgf, const SystemConfig& config);
/// Requires an MGF of the centered total with exponent 1/2.
Residual overloaded_ode_residual(const MgfEstimate& mgf, const SystemConfig& config);

struct SscEstimate {
  double perp_second_moment = 0.0;
  double total_second_moment = 0.0;
  double std_error = 0.0;
  double total_std_error = 0.0;
};

/// E||q_perp||^2 with ||q_perp||^2 = ||q||^2 - (sum q)^2/n. DimensionError for n = 1.
SscEstimate ssc_estimate(const SampleSet& samples);

struct UnusedRate {
  double raw = 0.0;
  double critical_scaled = 0.0;
  double raw_std_error = 0.0;
  double scaled_std_error = 0.0;
};

UnusedRate unused_service_rate(const SampleSet& samples, double gamma);

/// One-sample Kolmogorov-Smirnov distance against a continuous law.
double ks_statistic(std::span<const double> samples, const LimitDistribution& dist);
/// Two-sample Kolmogorov-Smirnov distance; exact with ties.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

struct MomentRow {
  std::string key;  // "x1^2", "x1*x2", ...
  int order = 0;
  double empirical = 0.0;
  double std_error = 0.0;
  double limit = 0.0;
  double z = 0.0;
};

/// Per-coordinate moments E[x_k^m] for m <= max_order and, for n >= 2, the
/// cross moments E[x_1^a x_2^b] with a, b >= 1 and a + b <= max_order, all
/// compared with E[U^m] of the coordinate limit U. max_order must be <= 4.
std::vector<MomentRow> moment_report(const ScaledSampleSet& samples, const LimitDistribution& coordinate,
                                     int max_order);

}  // namespace jsqa

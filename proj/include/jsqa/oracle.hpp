#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "jsqa/config.hpp"

namespace jsqa {

/// Exact one-slot kernel of the chain on {0..cap}^n, n <= 2, in CSR form.
/// Mass that would leave the box is moved onto the boundary.
struct TruncatedChain {
  SystemConfig config;
  std::int64_t cap = 0;
  std::size_t states = 0;

  std::vector<std::size_t> row_start;  // states + 1 entries
  std::vector<std::uint32_t> column;
  std::vector<double> probability;

  /// Per row: probability that was clamped onto the cap.
  std::vector<double> overflow;
  /// Per row: E[sum u | q] for the slot leaving q.
  std::vector<double> expected_unused;
  double max_row_overflow = 0.0;

  int n() const noexcept { return config.n; }
  std::vector<std::int64_t> state(std::size_t index) const;
  std::size_t index(std::span<const std::int64_t> q) const;
  std::int64_t total(std::size_t index) const;
};

inline constexpr std::size_t kMaxOracleStates = 1'000'000;
inline constexpr std::size_t kDenseSolveLimit = 4096;

/// Throws DimensionError for n > 2 and ResourceLimitError beyond the state budget.
TruncatedChain build_chain(const SystemConfig& config, std::int64_t cap);

struct StationaryOptions {
  double tolerance = 1e-12;  // total-variation change per sweep
  std::int64_t max_iterations = 2'000'000;
};

/// pi P = pi, sum pi = 1. Dense LU up to kDenseSolveLimit states, power
/// iteration above (ConvergenceError when the budget runs out).
std::vector<double> stationary(const TruncatedChain& chain, const StationaryOptions& options = {});

/// ||pi P - pi||_1.
double stationary_residual(const TruncatedChain& chain, std::span<const double> pi);

/// Stationary mass that the truncation clamps per slot: sum pi(q) overflow(q).
double leakage(const TruncatedChain& chain, std::span<const double> pi);

struct OracleSolution {
  TruncatedChain chain;
  std::vector<double> pi;
  double leakage = 0.0;
};

/// Solves at the given cap, or, without one, starts from
/// ceil(nu+/gamma + 10 sqrt(sigma^2/gamma)) and doubles until the leakage
/// drops below target_leakage.
OracleSolution solve_oracle(const SystemConfig& config, std::optional<std::int64_t> cap = {},
                            double target_leakage = 1e-8);

struct OracleMoments {
  double total = 0.0;                  // E[(sum q)^m]
  std::vector<double> per_queue;       // E[q_i^m]
  double perp_second_moment = 0.0;     // E||q_perp||^2, zero for n = 1
};

OracleMoments oracle_moments(const TruncatedChain& chain, std::span<const double> pi, int order);
/// E[exp(sqrt(gamma) phi sum q)].
double oracle_mgf(const TruncatedChain& chain, std::span<const double> pi, double gamma, double phi);
/// E[sum u].
double oracle_unused_mean(const TruncatedChain& chain, std::span<const double> pi);

}  // namespace jsqa

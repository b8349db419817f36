#include "jsqa/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "jsqa/binomial.hpp"
#include "jsqa/errors.hpp"

namespace jsqa {

std::vector<std::int64_t> TruncatedChain::state(std::size_t index) const {
  std::vector<std::int64_t> q(static_cast<std::size_t>(n()));
  const auto side = static_cast<std::size_t>(cap + 1);
  for (std::size_t k = q.size(); k-- > 0;) {
    q[k] = static_cast<std::int64_t>(index % side);
    index /= side;
  }
  return q;
}

std::size_t TruncatedChain::index(std::span<const std::int64_t> q) const {
  std::size_t idx = 0;
  for (auto v : q) {
    if (v < 0 || v > cap) throw OutOfRangeError("state outside the truncated box");
    idx = idx * static_cast<std::size_t>(cap + 1) + static_cast<std::size_t>(v);
  }
  return idx;
}

std::int64_t TruncatedChain::total(std::size_t index) const {
  std::int64_t t = 0;
  for (auto v : state(index)) t += v;
  return t;
}

namespace {

std::vector<double> binomial_pmf(std::int64_t trials, double p) {
  std::vector<double> pmf(static_cast<std::size_t>(trials) + 1, 0.0);
  if (p <= 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (p >= 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }
  const double lp = std::log(p), lq = std::log1p(-p);
  const double lf = log_factorial(trials);
  for (std::int64_t k = 0; k <= trials; ++k)
    pmf[static_cast<std::size_t>(k)] = std::exp(lf - log_factorial(k) - log_factorial(trials - k) +
                                                static_cast<double>(k) * lp + static_cast<double>(trials - k) * lq);
  return pmf;
}

std::vector<double> support_pmf(const BoundedDistribution& d) {
  std::vector<double> pmf(static_cast<std::size_t>(d.support_max()) + 1);
  for (std::size_t k = 0; k < pmf.size(); ++k) pmf[k] = d.pmf(static_cast<std::int64_t>(k));
  return pmf;
}

// Law of an integer increment on [lo, lo + mass.size()).
struct Increment {
  std::int64_t lo = 0;
  std::vector<double> mass;
};

Increment arrival_minus_service(const std::vector<double>& a, const std::vector<double>& s) {
  Increment inc;
  inc.lo = -static_cast<std::int64_t>(s.size() - 1);
  inc.mass.assign(a.size() + s.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) inc.mass[i + s.size() - 1 - j] += a[i] * s[j];
  return inc;
}

struct Marginal {
  std::vector<double> mass;  // over 0..cap
  double overflow = 0.0;
  double unused = 0.0;
};

// max(0, q - d + c) with d ~ Bin(q, gamma), clamped at cap.
void queue_marginal(std::int64_t q, const std::vector<double>& abandon, const Increment& inc, std::int64_t cap,
                    Marginal& out) {
  out.mass.assign(static_cast<std::size_t>(cap) + 1, 0.0);
  out.overflow = 0.0;
  out.unused = 0.0;
  for (std::int64_t d = 0; d <= q; ++d) {
    const double pd = abandon[static_cast<std::size_t>(d)];
    if (pd == 0.0) continue;
    const std::int64_t base = q - d + inc.lo;
    for (std::size_t c = 0; c < inc.mass.size(); ++c) {
      const double p = pd * inc.mass[c];
      if (p == 0.0) continue;
      const std::int64_t v = base + static_cast<std::int64_t>(c);
      if (v < 0) {
        out.mass[0] += p;
        out.unused += p * static_cast<double>(-v);
      } else if (v > cap) {
        out.mass[static_cast<std::size_t>(cap)] += p;
        out.overflow += p;
      } else {
        out.mass[static_cast<std::size_t>(v)] += p;
      }
    }
  }
}

}  // namespace

TruncatedChain build_chain(const SystemConfig& config, std::int64_t cap) {
  // gamma = 0 is a legitimate kernel (no abandonment) even though the
  // simulated model requires gamma > 0.
  auto probe = config;
  if (probe.gamma == 0.0) probe.gamma = 1.0;
  const auto report = validate(probe);
  if (!report.ok) throw ValidationError(report.violations.front());
  if (config.n > 2) throw DimensionError("the exact oracle supports n <= 2");
  if (cap < 1) throw ValidationError("cap must be positive");
  const double states_real = std::pow(static_cast<double>(cap + 1), config.n);
  if (states_real > static_cast<double>(kMaxOracleStates))
    throw ResourceLimitError("truncated chain would have " + std::to_string(static_cast<long long>(states_real)) +
                             " states, above the budget of " + std::to_string(kMaxOracleStates));

  TruncatedChain chain;
  chain.config = config;
  chain.cap = cap;
  chain.states = static_cast<std::size_t>(states_real);
  chain.row_start.reserve(chain.states + 1);
  chain.row_start.push_back(0);
  chain.overflow.resize(chain.states);
  chain.expected_unused.resize(chain.states);

  std::vector<std::vector<double>> abandon(static_cast<std::size_t>(cap) + 1);
  for (std::int64_t q = 0; q <= cap; ++q) abandon[static_cast<std::size_t>(q)] = binomial_pmf(q, config.gamma);
  const auto a = support_pmf(config.arrivals);
  std::vector<Increment> with_arrival, without_arrival;
  for (const auto& s : config.services) {
    const auto sp = support_pmf(s);
    with_arrival.push_back(arrival_minus_service(a, sp));
    without_arrival.push_back(arrival_minus_service({1.0}, sp));
  }

  const auto side = static_cast<std::size_t>(cap) + 1;
  std::vector<double> row(chain.states, 0.0);
  Marginal m0, m1;
  for (std::size_t idx = 0; idx < chain.states; ++idx) {
    const auto q = chain.state(idx);
    double over = 0.0, unused = 0.0;
    if (config.n == 1) {
      queue_marginal(q[0], abandon[static_cast<std::size_t>(q[0])], with_arrival[0], cap, m0);
      for (std::size_t j = 0; j < side; ++j) row[j] = m0.mass[j];
      over = m0.overflow;
      unused = m0.unused;
    } else {
      // Given the dispatch decision the two queues move independently.
      std::fill(row.begin(), row.end(), 0.0);
      for (std::size_t dest = 0; dest < 2; ++dest) {
        double w;
        if (q[0] == q[1]) {
          w = 0.5;
        } else {
          w = (q[dest] < q[1 - dest]) ? 1.0 : 0.0;
        }
        if (w == 0.0) continue;
        queue_marginal(q[0], abandon[static_cast<std::size_t>(q[0])],
                       dest == 0 ? with_arrival[0] : without_arrival[0], cap, m0);
        queue_marginal(q[1], abandon[static_cast<std::size_t>(q[1])],
                       dest == 1 ? with_arrival[1] : without_arrival[1], cap, m1);
        for (std::size_t i = 0; i < side; ++i) {
          const double pi = w * m0.mass[i];
          if (pi == 0.0) continue;
          double* dst = row.data() + i * side;
          for (std::size_t j = 0; j < side; ++j) dst[j] += pi * m1.mass[j];
        }
        over += w * (m0.overflow + m1.overflow - m0.overflow * m1.overflow);
        unused += w * (m0.unused + m1.unused);
      }
    }
    for (std::size_t j = 0; j < chain.states; ++j) {
      if (row[j] == 0.0) continue;
      chain.column.push_back(static_cast<std::uint32_t>(j));
      chain.probability.push_back(row[j]);
    }
    chain.row_start.push_back(chain.column.size());
    chain.overflow[idx] = over;
    chain.expected_unused[idx] = unused;
    chain.max_row_overflow = std::max(chain.max_row_overflow, over);
  }
  return chain;
}

namespace {

void apply(const TruncatedChain& chain, std::span<const double> x, std::vector<double>& y) {
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < chain.states; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t k = chain.row_start[i]; k < chain.row_start[i + 1]; ++k)
      y[chain.column[k]] += xi * chain.probability[k];
  }
}

}  // namespace

std::vector<double> stationary(const TruncatedChain& chain, const StationaryOptions& options) {
  const std::size_t S = chain.states;
  std::vector<double> pi(S, 0.0);
  if (S <= kDenseSolveLimit) {
    // (P^T - I) pi = 0 with the last equation replaced by sum pi = 1.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
    for (std::size_t i = 0; i < S; ++i)
      for (std::size_t k = chain.row_start[i]; k < chain.row_start[i + 1]; ++k)
        A(chain.column[k], static_cast<Eigen::Index>(i)) += chain.probability[k];
    A.diagonal().array() -= 1.0;
    A.row(static_cast<Eigen::Index>(S - 1)).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S));
    rhs(static_cast<Eigen::Index>(S - 1)) = 1.0;
    const Eigen::VectorXd x = A.partialPivLu().solve(rhs);
    double total = 0.0;
    for (std::size_t i = 0; i < S; ++i) {
      pi[i] = std::max(x(static_cast<Eigen::Index>(i)), 0.0);  // round-off can leave -1e-20
      total += pi[i];
    }
    for (auto& p : pi) p /= total;
    return pi;
  }
  std::fill(pi.begin(), pi.end(), 1.0 / static_cast<double>(S));
  std::vector<double> next(S);
  for (std::int64_t it = 0; it < options.max_iterations; ++it) {
    apply(chain, pi, next);
    double change = 0.0, total = 0.0;
    for (std::size_t i = 0; i < S; ++i) total += next[i];
    for (std::size_t i = 0; i < S; ++i) {
      next[i] /= total;
      change += std::abs(next[i] - pi[i]);
    }
    pi.swap(next);
    if (0.5 * change < options.tolerance) return pi;
  }
  throw ConvergenceError("power iteration did not converge within " + std::to_string(options.max_iterations) +
                         " sweeps");
}

double stationary_residual(const TruncatedChain& chain, std::span<const double> pi) {
  std::vector<double> next(chain.states);
  apply(chain, pi, next);
  double r = 0.0;
  for (std::size_t i = 0; i < chain.states; ++i) r += std::abs(next[i] - pi[i]);
  return r;
}

double leakage(const TruncatedChain& chain, std::span<const double> pi) {
  double l = 0.0;
  for (std::size_t i = 0; i < chain.states; ++i) l += pi[i] * chain.overflow[i];
  return l;
}

OracleSolution solve_oracle(const SystemConfig& config, std::optional<std::int64_t> cap, double target_leakage) {
  if (cap) {
    OracleSolution s{build_chain(config, *cap), {}, 0.0};
    s.pi = stationary(s.chain);
    s.leakage = leakage(s.chain, s.pi);
    return s;
  }
  const double nu_plus = std::max(config.drift(), 0.0);
  auto k = static_cast<std::int64_t>(std::ceil(nu_plus / config.gamma + 10.0 * std::sqrt(config.variance() / config.gamma)));
  k = std::max<std::int64_t>(k, 1);
  while (true) {
    OracleSolution s{build_chain(config, k), {}, 0.0};
    s.pi = stationary(s.chain);
    s.leakage = leakage(s.chain, s.pi);
    if (s.leakage < target_leakage) return s;
    k *= 2;
  }
}

OracleMoments oracle_moments(const TruncatedChain& chain, std::span<const double> pi, int order) {
  if (order < 1) throw DomainError("moment order must be at least 1");
  OracleMoments m;
  m.per_queue.assign(static_cast<std::size_t>(chain.n()), 0.0);
  for (std::size_t i = 0; i < chain.states; ++i) {
    if (pi[i] == 0.0) continue;
    const auto q = chain.state(i);
    double t = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto v = static_cast<double>(q[k]);
      m.per_queue[k] += pi[i] * std::pow(v, order);
      t += v;
      sq += v * v;
    }
    m.total += pi[i] * std::pow(t, order);
    m.perp_second_moment += pi[i] * (sq - t * t / static_cast<double>(q.size()));
  }
  return m;
}

double oracle_mgf(const TruncatedChain& chain, std::span<const double> pi, double gamma, double phi) {
  const double theta = std::sqrt(gamma) * phi;
  double m = 0.0;
  for (std::size_t i = 0; i < chain.states; ++i)
    if (pi[i] != 0.0) m += pi[i] * std::exp(theta * static_cast<double>(chain.total(i)));
  return m;
}

double oracle_unused_mean(const TruncatedChain& chain, std::span<const double> pi) {
  double u = 0.0;
  for (std::size_t i = 0; i < chain.states; ++i) u += pi[i] * chain.expected_unused[i];
  return u;
}

}  // namespace jsqa

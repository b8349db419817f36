#include "jsqa/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jsqa/errors.hpp"

namespace jsqa {

std::string_view to_string(MgfStatistic s) noexcept {
  switch (s) {
    case MgfStatistic::per_queue: return "per-queue";
    case MgfStatistic::total: return "total";
    case MgfStatistic::centered_total: return "centered-total";
  }
  return "unknown";
}

std::vector<double> default_phi_grid() {
  std::vector<double> grid(33);
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = -1.0 + 1.5 * static_cast<double>(k) / 32.0;
  return grid;
}

namespace {

double raw_statistic(const SampleSet& s, std::size_t i, MgfStatistic stat, const MgfOptions& opt, double center) {
  switch (stat) {
    case MgfStatistic::per_queue: return static_cast<double>(s.queue(i, opt.queue));
    case MgfStatistic::total: return static_cast<double>(s.total(i));
    case MgfStatistic::centered_total: return static_cast<double>(s.total(i)) - center;
  }
  return 0.0;
}

// sd of per-batch quantities over sqrt(B).
double spread(const std::vector<double>& per_batch) { return batch_stderr(per_batch); }

}  // namespace

MgfEstimate empirical_mgf(const SampleSet& samples, double gamma, std::span<const double> phi_grid,
                          MgfStatistic statistic, const MgfOptions& options) {
  if (samples.empty()) throw ValidationError("empirical MGF of an empty sample set");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw OutOfRangeError("gamma out of (0,1]");
  if (statistic == MgfStatistic::per_queue && options.queue >= static_cast<std::size_t>(samples.n()))
    throw DimensionError("queue index out of range");

  MgfEstimate est;
  est.statistic = statistic;
  est.gamma = gamma;
  est.scale_exponent = options.scale_exponent;
  est.scale = std::pow(gamma, options.scale_exponent);
  est.phi_grid.assign(phi_grid.begin(), phi_grid.end());
  const std::size_t K = phi_grid.size();
  const std::size_t N = samples.size();
  const double center = options.drift / gamma;

  std::vector<double> y(N);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < N; ++i) {
    y[i] = est.scale * raw_statistic(samples, i, statistic, options, center);
    lo = std::min(lo, y[i]);
    hi = std::max(hi, y[i]);
  }
  std::vector<bool> finite(K);
  for (std::size_t k = 0; k < K; ++k)
    finite[k] = std::max(phi_grid[k] * lo, phi_grid[k] * hi) <= options.max_exponent;

  const auto layout = samples.batches(options.batches_per_replica);
  const std::size_t B = layout.size();
  est.batch_count = B;
  est.batch_values.assign(B * K, 0.0);
  est.batch_derivatives.assign(B * K, 0.0);
  est.batch_unused.assign(B, 0.0);
  std::vector<double> sum_v(K, 0.0), sum_d(K, 0.0);
  double sum_u = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    const auto [begin, end] = layout.ranges()[b];
    std::vector<double> bv(K, 0.0), bd(K, 0.0);
    double bu = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t k = 0; k < K; ++k) {
        if (!finite[k]) continue;
        const double e = std::exp(phi_grid[k] * y[i]);
        bv[k] += e;
        bd[k] += y[i] * e;
      }
      bu += static_cast<double>(samples.u_total(i));
    }
    const double len = static_cast<double>(end - begin);
    for (std::size_t k = 0; k < K; ++k) {
      sum_v[k] += bv[k];
      sum_d[k] += bd[k];
      est.batch_values[b * K + k] = bv[k] / len;
      est.batch_derivatives[b * K + k] = bd[k] / len;
    }
    sum_u += bu;
    est.batch_unused[b] = bu / len;
  }

  const double inv_n = 1.0 / static_cast<double>(N);
  est.values.resize(K);
  est.derivatives.resize(K);
  est.std_error.resize(K);
  est.derivative_std_error.resize(K);
  est.usable.resize(K);
  std::vector<double> column(B);
  for (std::size_t k = 0; k < K; ++k) {
    if (!finite[k]) {
      est.values[k] = est.derivatives[k] = est.std_error[k] = est.derivative_std_error[k] =
          std::numeric_limits<double>::quiet_NaN();
      est.usable[k] = false;
      continue;
    }
    est.values[k] = sum_v[k] * inv_n;
    est.derivatives[k] = sum_d[k] * inv_n;
    for (std::size_t b = 0; b < B; ++b) column[b] = est.batch_values[b * K + k];
    est.std_error[k] = spread(column);
    for (std::size_t b = 0; b < B; ++b) column[b] = est.batch_derivatives[b * K + k];
    est.derivative_std_error[k] = spread(column);
    est.usable[k] = est.std_error[k] <= options.max_relative_stderr * est.values[k];
  }
  est.mean_unused = sum_u * inv_n;
  est.mean_unused_std_error = spread(est.batch_unused);
  return est;
}

double Residual::max_abs_z() const noexcept {
  double worst = 0.0;
  for (std::size_t k = 0; k < value.size(); ++k) {
    if (!usable[k]) continue;
    double z;
    if (std_error[k] > 0.0) {
      z = std::abs(value[k]) / std_error[k];
    } else {
      z = value[k] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    worst = std::max(worst, z);
  }
  return worst;
}

double classic_identity(double phi, double m, double k, double w) noexcept { return (k + 0.5 * phi * w) * m - k; }

double critical_identity(double phi, double m, double dm, double k, double w, double u) noexcept {
  return -m * (0.5 * phi * w + k) + dm - u;
}

double overloaded_identity(double phi, double m, double dm, double b) noexcept { return 0.5 * phi * b * m - dm; }

namespace {

// Evaluates f(phi, M, M', mean u) on grand means and on each batch.
template <class F>
Residual residual_from(const MgfEstimate& mgf, F&& f) {
  Residual r;
  const std::size_t K = mgf.size();
  const std::size_t B = mgf.batch_count;
  r.phi = mgf.phi_grid;
  r.value.resize(K);
  r.std_error.resize(K);
  r.usable = mgf.usable;
  std::vector<double> per_batch(B);
  for (std::size_t k = 0; k < K; ++k) {
    const double phi = mgf.phi_grid[k];
    r.value[k] = f(phi, mgf.values[k], mgf.derivatives[k], mgf.mean_unused);
    for (std::size_t b = 0; b < B; ++b)
      per_batch[b] = f(phi, mgf.batch_values[b * K + k], mgf.batch_derivatives[b * K + k], mgf.batch_unused[b]);
    r.std_error[k] = batch_stderr(per_batch);
  }
  return r;
}

void require(bool ok, const char* what) {
  if (!ok) throw RegimeMismatchError(what);
}

}  // namespace

Residual classic_residual(const MgfEstimate& mgf, const SystemConfig& config, const RegimeSpec& spec) {
  require(spec.kind == RegimeKind::classic, "classic residual needs a classic regime");
  require(mgf.statistic == MgfStatistic::total, "classic residual needs the MGF of the total");
  require(std::abs(mgf.scale_exponent - spec.alpha) < 1e-12, "classic residual needs scaling exponent alpha");
  const double nu = config.drift();
  const double k = nu / std::pow(config.gamma, spec.alpha);
  const double w = config.variance() + nu * nu;
  return residual_from(mgf, [&](double phi, double m, double, double) { return classic_identity(phi, m, k, w); });
}

Residual critical_ode_residual(const MgfEstimate& mgf, const SystemConfig& config) {
  require(mgf.statistic == MgfStatistic::total, "critical residual needs the MGF of the total");
  require(mgf.scale_exponent == 0.5, "critical residual needs sqrt(gamma) scaling");
  const double nu = config.drift();
  const double root = std::sqrt(config.gamma);
  const double k = nu / root;
  const double w = config.variance() + nu * nu;
  return residual_from(mgf, [&](double phi, double m, double dm, double u) {
    return critical_identity(phi, m, dm, k, w, u / root);
  });
}

Residual overloaded_ode_residual(const MgfEstimate& mgf, const SystemConfig& config) {
  require(mgf.statistic == MgfStatistic::centered_total, "overloaded residual needs the centered-total MGF");
  require(mgf.scale_exponent == 0.5, "overloaded residual needs sqrt(gamma) scaling");
  const double nu = config.drift();
  const double b = config.variance() + nu * (1.0 - config.gamma);
  return residual_from(mgf, [&](double phi, double m, double dm, double) { return overloaded_identity(phi, m, dm, b); });
}

SscEstimate ssc_estimate(const SampleSet& samples) {
  if (samples.n() < 2) throw DimensionError("state space collapse needs n >= 2");
  if (samples.empty()) throw ValidationError("SSC estimate of an empty sample set");
  const double n = samples.n();
  auto norm2 = [&](std::size_t i) {
    double s = 0.0;
    for (auto v : samples.q(i)) s += static_cast<double>(v) * static_cast<double>(v);
    return s;
  };
  auto perp = [&](std::size_t i) {
    const double t = static_cast<double>(samples.total(i));
    return std::max(0.0, norm2(i) - t * t / n);
  };
  const auto layout = samples.batches();
  const auto p = batch_estimate(layout, samples.size(), perp);
  const auto t = batch_estimate(layout, samples.size(), norm2);
  return {p.mean, t.mean, p.std_error, t.std_error};
}

UnusedRate unused_service_rate(const SampleSet& samples, double gamma) {
  if (samples.empty()) return {};
  const auto e = batch_estimate(samples.batches(), samples.size(),
                                [&](std::size_t i) { return static_cast<double>(samples.u_total(i)); });
  const double root = std::sqrt(gamma);
  return {e.mean, e.mean / root, e.std_error, e.std_error / root};
}

double ks_statistic(std::span<const double> samples, const LimitDistribution& dist) {
  if (samples.empty()) throw ValidationError("KS statistic of an empty sample");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double N = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = dist.cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / N - F, F - static_cast<double>(i) / N});
  }
  return std::clamp(d, 0.0, 1.0);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("KS statistic of an empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

std::vector<MomentRow> moment_report(const ScaledSampleSet& samples, const LimitDistribution& coordinate,
                                     int max_order) {
  if (max_order < 1 || max_order > 4) throw DomainError("moment orders must lie in 1..4");
  std::vector<MomentRow> rows;
  if (samples.size() == 0) return rows;
  const auto layout = samples.batches();
  auto add = [&](std::string key, int order, auto&& value) {
    const auto e = batch_estimate(layout, samples.size(), value);
    MomentRow row{std::move(key), order, e.mean, e.std_error, coordinate.moment(order), 0.0};
    const double gap = row.empirical - row.limit;
    if (row.std_error > 0.0) {
      row.z = gap / row.std_error;
    } else {
      row.z = gap == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), gap);
    }
    rows.push_back(std::move(row));
  };
  const auto n = static_cast<std::size_t>(samples.n());
  for (std::size_t k = 0; k < n; ++k)
    for (int m = 1; m <= max_order; ++m)
      add("x" + std::to_string(k + 1) + "^" + std::to_string(m), m,
          [&](std::size_t i) { return std::pow(samples.coordinate(i, k), m); });
  if (n >= 2) {
    for (int a = 1; a < max_order; ++a)
      for (int b = 1; a + b <= max_order; ++b) {
        std::string key = "x1";
        if (a > 1) key += "^" + std::to_string(a);
        key += "*x2";
        if (b > 1) key += "^" + std::to_string(b);
        add(std::move(key), a + b, [&](std::size_t i) {
          return std::pow(samples.coordinate(i, 0), a) * std::pow(samples.coordinate(i, 1), b);
        });
      }
  }
  return rows;
}

}  // namespace jsqa

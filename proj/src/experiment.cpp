#include "jsqa/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "jsqa/errors.hpp"
#include "jsqa/limits.hpp"
#include "jsqa/transform.hpp"

namespace jsqa {

namespace fs = std::filesystem;

SamplingPlan ExperimentManifest::plan_for(const SystemConfig& config) const {
  auto plan = SamplingPlan::defaults(config, num_samples, replicas);
  if (thinning) plan.thinning = *thinning;
  if (warmup_slots) plan.warmup_slots = *warmup_slots;
  return plan;
}

void ExperimentManifest::validate() const {
  regime.validate();
  if (gammas.empty()) throw ValidationError("manifest has no gamma values");
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (!(gammas[k] > 0.0 && gammas[k] < 1.0)) throw ValidationError("gamma values must lie in (0,1)");
    if (k > 0 && !(gammas[k] < gammas[k - 1])) throw ValidationError("gamma values must be strictly decreasing");
    try {
      plan_for(build_config(regime, gammas[k])).validate();
    } catch (const OutOfRangeError& e) {
      throw ValidationError(e.what());
    }
  }
  for (int m : moment_orders)
    if (m < 1 || m > 4) throw ValidationError("moment orders must lie in 1..4");
  if (phi_grid.empty()) throw ValidationError("phi grid is empty");
}

ExperimentManifest manifest_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("manifest must be a JSON object");
  ExperimentManifest m;
  try {
    m.regime = regime_from_json(j.at("regime"));
    m.gammas = j.at("gammas").get<std::vector<double>>();
    if (j.contains("plan")) {
      const auto& p = j.at("plan");
      if (p.contains("num_samples")) m.num_samples = p.at("num_samples").get<std::int64_t>();
      if (p.contains("replicas")) m.replicas = p.at("replicas").get<std::int64_t>();
      if (p.contains("warmup_slots")) m.warmup_slots = p.at("warmup_slots").get<std::int64_t>();
      if (p.contains("thinning")) m.thinning = p.at("thinning").get<std::int64_t>();
    }
    m.phi_grid = j.contains("phi_grid") ? j.at("phi_grid").get<std::vector<double>>() : default_phi_grid();
    if (j.contains("moment_orders")) m.moment_orders = j.at("moment_orders").get<std::vector<int>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("outputs")) m.outputs = j.at("outputs").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad manifest: ") + e.what());
  }
  m.validate();
  return m;
}

nlohmann::json to_json(const ExperimentManifest& m) {
  nlohmann::json j;
  j["regime"] = to_json(m.regime);
  j["gammas"] = m.gammas;
  j["plan"] = {{"num_samples", m.num_samples}, {"replicas", m.replicas}};
  if (m.warmup_slots) j["plan"]["warmup_slots"] = *m.warmup_slots;
  if (m.thinning) j["plan"]["thinning"] = *m.thinning;
  j["phi_grid"] = m.phi_grid;
  j["moment_orders"] = m.moment_orders;
  j["seed"] = m.seed;
  j["outputs"] = m.outputs.string();
  return j;
}

ExperimentManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed JSON in '" + path.string() + "': " + e.what());
  }
  return manifest_from_json(j);
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

nlohmann::json limit_json(const LimitDistribution& d) {
  return {{"kind", std::string(to_string(d.kind()))},
          {"location", d.location()},
          {"variance_parameter", d.variance_parameter()},
          {"mean", d.mean()}};
}

class ResultWriter {
 public:
  ResultWriter(const fs::path& file, std::string regime) : out_(file), regime_(std::move(regime)) {
    if (!out_) throw Error("cannot write '" + file.string() + "'");
    out_ << "gamma,regime,statistic,key,value,stderr\n";
    out_.flush();
  }
  void row(double gamma, std::string_view statistic, std::string_view key, double value, double se) {
    out_ << num(gamma) << ',' << regime_ << ',' << statistic << ',' << key << ',' << num(value) << ',' << num(se)
         << '\n';
  }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::string regime_;
};

struct CentralMoments {
  Estimate variance;
  double skewness = 0.0;
};

CentralMoments central_moments(std::span<const double> x, const BatchLayout& layout) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  const auto var = batch_estimate(layout, x.size(), [&](std::size_t i) { return (x[i] - mean) * (x[i] - mean); });
  double m3 = 0.0;
  for (double v : x) m3 += (v - mean) * (v - mean) * (v - mean);
  m3 /= static_cast<double>(x.size());
  CentralMoments c;
  c.variance = var;
  c.skewness = var.mean > 0.0 ? m3 / std::pow(var.mean, 1.5) : 0.0;
  return c;
}

}  // namespace

RunSummary run_experiment(const ExperimentManifest& manifest, const RunOptions& options) {
  manifest.validate();
  const fs::path dir = options.out_dir.value_or(manifest.outputs);
  fs::create_directories(dir);
  const auto& spec = manifest.regime;
  const std::string regime_name(to_string(spec.kind));
  const auto lim_var = limit_sigma2(spec);
  const auto limit = limit_for_regime(spec);

  nlohmann::json sidecar;
  sidecar["manifest"] = to_json(manifest);
  sidecar["derived"] = {{"sigma2", lim_var.sigma2},
                        {"bar_sigma2", lim_var.bar_sigma2},
                        {"coordinate_limit", limit_json(limit.coordinate)},
                        {"total_limit", limit_json(limit.total)}};
  if (spec.kind == RegimeKind::critical)
    sidecar["derived"]["unused_limit"] = critical_unused_limit(spec.constant, lim_var.sigma2);
  sidecar["points"] = nlohmann::json::array();
  for (double g : manifest.gammas) {
    const auto c = build_config(spec, g);
    const auto plan = manifest.plan_for(c);
    sidecar["points"].push_back({{"gamma", g},
                                 {"nu", c.drift()},
                                 {"sigma2", c.variance()},
                                 {"arrival_mean", c.arrivals.mean()},
                                 {"warmup_slots", plan.warmup_slots},
                                 {"thinning", plan.thinning}});
  }
  {
    std::ofstream side(dir / "manifest.json");
    side << sidecar.dump(2) << '\n';
  }

  ResultWriter rows(dir / "results.csv", regime_name);
  RunSummary summary;
  SimulationOptions sim;
  sim.threads = std::max(1u, options.threads);

  for (std::size_t gi = 0; gi < manifest.gammas.size(); ++gi) {
    const double g = manifest.gammas[gi];
    if (options.before_gamma) options.before_gamma(gi, g);
    const auto config = build_config(spec, g);
    const auto plan = manifest.plan_for(config);
    // Each gamma point gets its own block of stream ids.
    sim.stream_base = static_cast<std::uint64_t>(gi) << 32;
    const auto samples = collect_steady_state(config, plan, manifest.seed, sim);
    const auto scaled = scale(samples, spec, g);
    const auto layout = samples.batches();
    GammaSummary point;
    point.gamma = g;

    rows.row(g, "config", "nu", config.drift(), 0.0);
    rows.row(g, "config", "sigma2", config.variance(), 0.0);
    const auto total = batch_estimate(layout, samples.size(), [&](std::size_t i) { return static_cast<double>(samples.total(i)); });
    rows.row(g, "mean", "total", total.mean, total.std_error);
    for (std::size_t k = 0; k < static_cast<std::size_t>(samples.n()); ++k) {
      const auto e = batch_estimate(layout, scaled.size(), [&](std::size_t i) { return scaled.coordinate(i, k); });
      rows.row(g, "scaled_mean", "x" + std::to_string(k + 1), e.mean, e.std_error);
    }
    const auto st = batch_estimate(layout, scaled.size(), [&](std::size_t i) { return scaled.total(i); });
    rows.row(g, "scaled_mean", "total", st.mean, st.std_error);
    const auto cm = central_moments(scaled.totals(), layout);
    rows.row(g, "scaled_variance", "total", cm.variance.mean, cm.variance.std_error);
    rows.row(g, "scaled_skewness", "total", cm.skewness, 0.0);

    const int max_order = *std::max_element(manifest.moment_orders.begin(), manifest.moment_orders.end());
    for (const auto& m : moment_report(scaled, limit.coordinate, max_order)) {
      if (std::find(manifest.moment_orders.begin(), manifest.moment_orders.end(), m.order) ==
          manifest.moment_orders.end())
        continue;
      rows.row(g, "moment", m.key, m.empirical, m.std_error);
      rows.row(g, "moment_limit", m.key, m.limit, 0.0);
      rows.row(g, "moment_z", m.key, m.z, 0.0);
      point.max_abs_moment_z = std::max(point.max_abs_moment_z, std::abs(m.z));
    }

    const auto column = scaled.column(0);
    point.ks_coordinate = ks_statistic(column, limit.coordinate);
    rows.row(g, "ks", "x1", point.ks_coordinate, 0.0);
    rows.row(g, "ks", "total", ks_statistic(scaled.totals(), limit.total), 0.0);

    MgfOptions mo;
    mo.scale_exponent = spec.kind == RegimeKind::classic ? spec.alpha : 0.5;
    mo.drift = config.drift();
    const auto statistic = spec.kind == RegimeKind::overloaded ? MgfStatistic::centered_total : MgfStatistic::total;
    const auto mgf = empirical_mgf(samples, g, manifest.phi_grid, statistic, mo);
    Residual res;
    switch (spec.kind) {
      case RegimeKind::classic: res = classic_residual(mgf, config, spec); break;
      case RegimeKind::critical: res = critical_ode_residual(mgf, config); break;
      case RegimeKind::overloaded: res = overloaded_ode_residual(mgf, config); break;
    }
    std::size_t unusable = 0;
    for (std::size_t k = 0; k < mgf.size(); ++k) {
      if (!mgf.usable[k]) {
        ++unusable;
        continue;
      }
      const std::string key = num(mgf.phi_grid[k]);
      rows.row(g, "mgf", key, mgf.values[k], mgf.std_error[k]);
      rows.row(g, "mgf_derivative", key, mgf.derivatives[k], mgf.derivative_std_error[k]);
      rows.row(g, "residual", key, res.value[k], res.std_error[k]);
    }
    rows.row(g, "residual_max_abs_z", "all", res.max_abs_z(), 0.0);
    rows.row(g, "mgf_unusable", "count", static_cast<double>(unusable), 0.0);

    if (samples.n() >= 2) {
      const auto ssc = ssc_estimate(samples);
      rows.row(g, "ssc", "perp_second_moment", ssc.perp_second_moment, ssc.std_error);
      rows.row(g, "ssc", "total_second_moment", ssc.total_second_moment, ssc.total_std_error);
      point.perp_second_moment = ssc.perp_second_moment;
      point.total_second_moment = ssc.total_second_moment;
    }
    const auto unused = unused_service_rate(samples, g);
    rows.row(g, "unused", "raw", unused.raw, unused.raw_std_error);
    rows.row(g, "unused", "critical_scaled", unused.critical_scaled, unused.scaled_std_error);
    rows.flush();
    summary.points.push_back(point);
  }

  bool ks_down = true, z_down = true, ratio_down = true, perp_bounded = true;
  for (std::size_t k = 1; k < summary.points.size(); ++k) {
    const auto& a = summary.points[k - 1];
    const auto& b = summary.points[k];
    ks_down = ks_down && b.ks_coordinate < a.ks_coordinate;
    z_down = z_down && b.max_abs_moment_z <= a.max_abs_moment_z;
    if (spec.n() >= 2) {
      ratio_down = ratio_down &&
                   b.perp_second_moment / b.total_second_moment < a.perp_second_moment / a.total_second_moment;
      perp_bounded = perp_bounded && b.perp_second_moment <= 2.0 * summary.points.front().perp_second_moment;
    }
  }
  summary.ks_trend = ks_down ? "decreasing" : "not-decreasing";
  summary.zscore_trend = z_down ? "shrinking" : "not-shrinking";
  summary.ssc_trend = spec.n() < 2 ? "n/a" : (ratio_down && perp_bounded ? "bounded" : "unbounded");

  std::ofstream sum(dir / "summary.csv");
  sum << "statistic,value\n";
  sum << "ks_trend," << summary.ks_trend << '\n';
  sum << "zscore_trend," << summary.zscore_trend << '\n';
  sum << "ssc_trend," << summary.ssc_trend << '\n';
  return summary;
}

double z_score(double simulated, double exact, double std_error) noexcept {
  const double gap = simulated - exact;
  if (std_error > 0.0) return gap / std_error;
  if (std::abs(gap) <= 1e-12 * std::max(1.0, std::abs(exact))) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), gap);
}

OracleCheckReport oracle_check(const SystemConfig& config, std::optional<std::int64_t> cap, const SamplingPlan& plan,
                               std::uint64_t seed, const SimulationOptions& options) {
  if (config.n > 2) throw DimensionError("oracle check supports n <= 2");
  const auto solution = solve_oracle(config, cap);
  const auto& chain = solution.chain;
  const auto samples = collect_steady_state(config, plan, seed, options);
  const auto layout = samples.batches();

  OracleCheckReport report;
  report.cap = chain.cap;
  report.leakage = solution.leakage;
  auto add = [&](std::string name, Estimate e, double exact) {
    report.rows.push_back({std::move(name), e.mean, e.std_error, exact, z_score(e.mean, exact, e.std_error)});
  };
  const auto m1 = oracle_moments(chain, solution.pi, 1);
  const auto m2 = oracle_moments(chain, solution.pi, 2);
  add("mean_total", batch_estimate(layout, samples.size(), [&](std::size_t i) { return static_cast<double>(samples.total(i)); }),
      m1.total);
  add("second_moment_total", batch_estimate(layout, samples.size(), [&](std::size_t i) {
        const auto t = static_cast<double>(samples.total(i));
        return t * t;
      }),
      m2.total);
  const double mean_exact = m1.total;
  add("variance_total", batch_estimate(layout, samples.size(), [&](std::size_t i) {
        const double d = static_cast<double>(samples.total(i)) - mean_exact;
        return d * d;
      }),
      m2.total - m1.total * m1.total);
  add("unused_mean", batch_estimate(layout, samples.size(), [&](std::size_t i) { return static_cast<double>(samples.u_total(i)); }),
      oracle_unused_mean(chain, solution.pi));
  if (config.n == 2) {
    const auto ssc = ssc_estimate(samples);
    add("perp_second_moment", {ssc.perp_second_moment, ssc.std_error}, m1.perp_second_moment);
  }
  const std::vector<double> grid{-1.0, -0.5, 0.25};
  const auto mgf = empirical_mgf(samples, config.gamma, grid, MgfStatistic::total);
  for (std::size_t k = 0; k < grid.size(); ++k)
    add("mgf(" + num(grid[k]) + ")", {mgf.values[k], mgf.std_error[k]}, oracle_mgf(chain, solution.pi, config.gamma, grid[k]));

  report.passed = true;
  for (const auto& r : report.rows) report.passed = report.passed && std::abs(r.z) < 4.0;
  return report;
}

void write_report(std::ostream& out, const OracleCheckReport& report) {
  out << "statistic,simulated,stderr,exact,z\n";
  for (const auto& r : report.rows)
    out << r.statistic << ',' << num(r.simulated) << ',' << num(r.std_error) << ',' << num(r.exact) << ','
        << num(r.z) << '\n';
  out << "# cap=" << report.cap << " leakage=" << num(report.leakage) << " result=" << (report.passed ? "pass" : "fail")
      << '\n';
}

void write_report(std::ostream& out, const DominationReport& r) {
  out << "slots_checked," << r.slots_checked << '\n'
      << "upper_violations," << r.upper_violations << '\n'
      << "lower_violations," << r.lower_violations << '\n'
      << "max_violation," << r.max_violation << '\n'
      << "max_queue," << r.max_queue << '\n'
      << "holds," << (r.holds() ? "true" : "false") << '\n';
}

}  // namespace jsqa

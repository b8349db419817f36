#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "jsqa/errors.hpp"
#include "jsqa/limits.hpp"
#include "jsqa/quadrature.hpp"
#include "jsqa/regimes.hpp"

using namespace jsqa;
using jsqa::test::D;

namespace {

// exp(phi x) p(x), zero where the density underflows, so that an infinite
// quadrature node never forms inf * 0.
double weighted(const LimitDistribution& d, double phi, double x) {
  const double p = d.pdf(x);
  return p == 0.0 ? 0.0 : std::exp(phi * x) * p;
}

template <class F>
double gk(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-13);
}

// Moments of N(mu, s^2) conditioned on X > 0 from the integration-by-parts
// recurrence m_k = mu m_{k-1} + (k-1) s^2 m_{k-2} + s^2 0^{k-1} p(0).
std::vector<double> tg_moments_by_recurrence(double mu, double v, int order) {
  const double s = std::sqrt(v);
  const double c = mu / s;
  const long double tail = 0.5L * boost::math::erfc(static_cast<long double>(-c) / std::numbers::sqrt2_v<long double>);
  const double p0 = static_cast<double>(std::exp(-0.5L * c * c) / (std::sqrt(2.0L * std::numbers::pi_v<long double>) * s * tail));
  std::vector<double> m(static_cast<std::size_t>(order) + 1);
  m[0] = 1.0;
  for (int k = 1; k <= order; ++k) {
    m[k] = mu * m[k - 1] + (k >= 2 ? (k - 1) * v * m[k - 2] : 0.0) + (k == 1 ? v * p0 : 0.0);
  }
  return m;
}

std::vector<LimitDistribution> sample_laws() {
  return {LimitDistribution::exponential(0.75), LimitDistribution::exponential(3.0),
          LimitDistribution::gaussian(0.22375), LimitDistribution::gaussian(2.0),
          LimitDistribution::truncated_gaussian(0.0, 1.0), LimitDistribution::truncated_gaussian(0.25, 0.1875),
          LimitDistribution::truncated_gaussian(-1.5, 0.4), LimitDistribution::truncated_gaussian(2.0, 0.5)};
}

double upper_end(const LimitDistribution& d) {
  const double s = std::sqrt(d.variance_parameter());
  switch (d.kind()) {
    case LimitKind::exponential: return 60.0 * d.location();
    case LimitKind::gaussian: return 40.0 * s;
    case LimitKind::truncated_gaussian: return std::max(d.location(), 0.0) + 40.0 * s;
  }
  return 0.0;
}

double lower_end(const LimitDistribution& d) {
  return d.kind() == LimitKind::gaussian ? -upper_end(d) : 0.0;
}

RegimeSpec two_queue_spec(RegimeKind kind, double constant, double alpha) {
  RegimeSpec s;
  s.kind = kind;
  s.constant = constant;
  s.alpha = alpha;
  s.base_services = {D::binomial(2, 0.25), D::binomial(2, 0.25)};
  s.bound = 4;
  return s;
}

}  // namespace

TEST_SUITE("limits") {

TEST_CASE("normal cdf and its logarithm deep in the tail") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-14));
  for (double x : {-1.0, -5.0, -20.0, -29.9, -30.1, -37.0, -50.0, -200.0}) {
    CAPTURE(x);
    const long double X = x;
    // Long double erfc underflows near x = -150; use the asymptotic series there.
    const long double ref =
        x > -100.0 ? std::log(0.5L * boost::math::erfc(-X / std::numbers::sqrt2_v<long double>))
                   : -0.5L * X * X - std::log(-X) - 0.5L * std::log(2.0L * std::numbers::pi_v<long double>) +
                         std::log(1.0L - 1.0L / (X * X) + 3.0L / (X * X * X * X) - 15.0L / (X * X * X * X * X * X));
    CHECK(log_normal_cdf(x) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-11));
  }
}

TEST_CASE("constructors reject invalid parameters") {
  CHECK_THROWS_AS(LimitDistribution::exponential(0.0), DomainError);
  CHECK_THROWS_AS(LimitDistribution::gaussian(-1.0), DomainError);
  CHECK_THROWS_AS(LimitDistribution::truncated_gaussian(0.0, 0.0), DomainError);
  CHECK_THROWS_AS(LimitDistribution::exponential(1.0).moment(0), DomainError);
  CHECK_THROWS_AS(LimitDistribution::exponential(1.0).scaled(0.0), DomainError);
}

TEST_CASE("limit_for_regime examples") {
  const auto classic = limit_for_regime(two_queue_spec(RegimeKind::classic, 0.5, 0.25));
  CHECK(classic.coordinate.kind() == LimitKind::exponential);
  CHECK(classic.coordinate.mean() == doctest::Approx(0.75));
  CHECK(classic.total.mean() == doctest::Approx(1.5));

  // sigma^2 = 2 from binomial(8, 1/2) arrivals against a constant service of 4.
  RegimeSpec one;
  one.kind = RegimeKind::critical;
  one.constant = 0.0;
  one.alpha = 0.5;
  one.base_services = {D::constant(4)};
  one.bound = 8;
  REQUIRE(limit_sigma2(one).sigma2 == doctest::Approx(2.0));
  const auto half = limit_for_regime(one);
  CHECK(half.coordinate.kind() == LimitKind::truncated_gaussian);
  CHECK(half.coordinate.location() == 0.0);
  CHECK(half.coordinate.variance_parameter() == doctest::Approx(1.0));

  const auto over = limit_for_regime(two_queue_spec(RegimeKind::overloaded, 0.2, 0.0));
  CHECK(over.coordinate.kind() == LimitKind::gaussian);
  CHECK(over.coordinate.variance_parameter() == doctest::Approx(0.22375));
  CHECK(over.total.variance_parameter() == doctest::Approx(0.895));

  const auto crit = limit_for_regime(two_queue_spec(RegimeKind::critical, 0.5, 0.5));
  CHECK(crit.coordinate.location() == doctest::Approx(0.25));
  CHECK(crit.coordinate.variance_parameter() == doctest::Approx(1.5 / 8));
  CHECK(crit.total.location() == doctest::Approx(0.5));
  CHECK(crit.total.variance_parameter() == doctest::Approx(0.75));
}

TEST_CASE("pdf and cdf examples") {
  const auto e = LimitDistribution::exponential(0.75);
  CHECK(e.cdf(0.0) == 0.0);
  CHECK(e.cdf(1e6) == 1.0);
  const auto h = LimitDistribution::truncated_gaussian(0.0, 1.0);
  CHECK(h.pdf(0.0) == doctest::Approx(2.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));
  CHECK(h.pdf(0.0) == doctest::Approx(0.7979).epsilon(1e-4));
  for (double x : {0.1, 0.7, 2.5}) CHECK(h.pdf(x) == doctest::Approx(2.0 * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi)));
  CHECK(h.pdf(-0.1) == 0.0);
  CHECK(h.cdf(0.0) == 0.0);
  CHECK(gk([&](double x) { return h.pdf(x); }, 0.0, std::numeric_limits<double>::infinity()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(LimitDistribution::gaussian(0.3).cdf(0.0) == 0.5);
}

TEST_CASE("mgf examples") {
  for (const auto& d : sample_laws()) CHECK(d.mgf(0.0) == 1.0);
  // bar sigma^2 = 2, n = 1: N(0, 1) and exp(phi^2 bar sigma^2 / 4) at phi = 1.
  CHECK(LimitDistribution::gaussian(1.0).mgf(1.0) == doctest::Approx(std::exp(0.5)).epsilon(1e-15));
  CHECK(LimitDistribution::gaussian(1.0).mgf(1.0) == doctest::Approx(1.64872).epsilon(1e-5));
  CHECK(LimitDistribution::exponential(0.5).mgf(1.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(LimitDistribution::exponential(0.5).mgf(2.0), DomainError);
  CHECK_THROWS_AS(LimitDistribution::exponential(0.5).mgf_derivative(2.5), DomainError);
}

TEST_CASE("moment examples") {
  CHECK(LimitDistribution::exponential(0.75).moment(2) == doctest::Approx(1.125));
  CHECK(LimitDistribution::truncated_gaussian(0.0, 1.0).moment(1) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-10));
  CHECK(LimitDistribution::gaussian(0.25).moment(3) == 0.0);
  CHECK(LimitDistribution::gaussian(0.25).moment(4) == doctest::Approx(3.0 * 0.0625));
  CHECK(LimitDistribution::exponential(2.0).moment(3) == doctest::Approx(48.0));
}

TEST_CASE("truncated Gaussian moments follow the integration-by-parts recurrence") {
  RngStream rng(12, 0);
  for (int t = 0; t < 60; ++t) {
    const double mu = -3.0 + 6.0 * rng.uniform();
    const double v = 0.05 + 3.0 * rng.uniform();
    CAPTURE(mu);
    CAPTURE(v);
    const auto d = LimitDistribution::truncated_gaussian(mu, v);
    const auto ref = tg_moments_by_recurrence(mu, v, 4);
    for (int k = 1; k <= 4; ++k) CHECK(d.moment(k) == doctest::Approx(ref[k]).epsilon(1e-8));
    CHECK(d.mean() == doctest::Approx(ref[1]).epsilon(1e-10));
    CHECK(d.variance() == doctest::Approx(ref[2] - ref[1] * ref[1]).epsilon(1e-7));
  }
}

TEST_CASE("finite-difference derivative at zero equals the first moment") {
  const double h = 1e-5;
  for (const auto& d : sample_laws()) {
    CAPTURE(to_string(d.kind()));
    const double fd = (d.mgf(h) - d.mgf(-h)) / (2.0 * h);
    CHECK(std::abs(fd - d.moment(1)) < 1e-6);
    CHECK(d.mgf_derivative(0.0) == doctest::Approx(d.mean()).epsilon(1e-10));
    for (double phi : {-1.0, -0.3, 0.2}) {
      const double fdp = (d.mgf(phi + h) - d.mgf(phi - h)) / (2.0 * h);
      CHECK(std::abs(fdp - d.mgf_derivative(phi)) < 1e-6 * std::max(1.0, std::abs(fdp)));
    }
  }
}

TEST_CASE("cdf is monotone and integrates the pdf") {
  for (const auto& d : sample_laws()) {
    CAPTURE(to_string(d.kind()));
    CAPTURE(d.location());
    const double lo = lower_end(d), hi = upper_end(d) / 8.0;
    double prev = -1.0;
    for (int k = 0; k <= 100; ++k) {
      const double x = lo / 8.0 + (hi - lo / 8.0) * k / 100.0;
      const double c = d.cdf(x);
      CHECK(c >= prev);
      prev = c;
      const double from = d.kind() == LimitKind::gaussian ? -std::numeric_limits<double>::infinity() : 0.0;
      const double integral = x <= from ? 0.0 : gk([&](double y) { return d.pdf(y); }, from, x);
      CHECK(std::abs(c - integral) < 1e-8);
    }
    CHECK(d.cdf(1e9) == doctest::Approx(1.0));
  }
}

TEST_CASE("truncated Gaussian mgf, closed form against direct quadrature") {
  for (const auto& d : {LimitDistribution::truncated_gaussian(0.0, 1.0), LimitDistribution::truncated_gaussian(0.5, 0.75),
                        LimitDistribution::truncated_gaussian(-2.0, 0.3), LimitDistribution::truncated_gaussian(1.0, 2.5)}) {
    for (int k = 0; k <= 40; ++k) {
      const double phi = -2.0 + 0.1 * k;
      const double direct = gk([&](double x) { return weighted(d, phi, x); }, 0.0,
                               std::numeric_limits<double>::infinity());
      CHECK(d.mgf(phi) == doctest::Approx(direct).epsilon(1e-8));
    }
  }
}

TEST_CASE("truncated Gaussian mgf equals the ratio-of-integrals form") {
  // exp(phi^2 s2/(4 n^2) + C phi/n) int_{-inf}^{phi} G / int_{-inf}^0 G,
  // G(s) = exp(-s^2 s2/(4 n^2) - C s/n), for the per-coordinate law.
  for (double c : {0.0, 0.5, -1.0})
    for (double s2 : {1.5, 2.0})
      for (int n : {1, 2}) {
        const double nn = n;
        const auto d = LimitDistribution::truncated_gaussian(c / nn, s2 / (2.0 * nn * nn));
        auto g = [&](double s) { return std::exp(-s * s * s2 / (4.0 * nn * nn) - c * s / nn); };
        const double denom = gk(g, -std::numeric_limits<double>::infinity(), 0.0);
        for (double phi : {-1.0, -0.4, 0.0, 0.3, 1.2}) {
          const double form = std::exp(phi * phi * s2 / (4.0 * nn * nn) + c * phi / nn) *
                              gk(g, -std::numeric_limits<double>::infinity(), phi) / denom;
          CHECK(d.mgf(phi) == doctest::Approx(form).epsilon(1e-10));
        }
      }
}

TEST_CASE("unused-service limit") {
  CHECK(critical_unused_limit(0.0, 2.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
  CHECK(critical_unused_limit(0.0, 2.0) == doctest::Approx(0.79788).epsilon(1e-5));
  const double l1 = critical_unused_limit(1.0, 2.0), l2 = critical_unused_limit(2.0, 2.0), l4 = critical_unused_limit(4.0, 2.0);
  CHECK(l1 > l2);
  CHECK(l2 > l4);
  CHECK(l4 > 0.0);
  for (double c = 0.125; c < 64.0; c *= 2.0) CHECK(critical_unused_limit(2.0 * c, 2.0) <= critical_unused_limit(c, 2.0));
  for (double c : {-2.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0})
    for (double s2 : {0.5, 1.5, 2.0, 5.0}) {
      const double integral = gk([&](double s) { return std::exp(-s * s * s2 / 4.0 - c * s); },
                                 -std::numeric_limits<double>::infinity(), 0.0);
      CHECK(critical_unused_limit(c, s2) == doctest::Approx(1.0 / integral).epsilon(1e-10));
    }
  CHECK_THROWS_AS(critical_unused_limit(0.0, 0.0), DomainError);
}

TEST_CASE("unused-service limit is the hazard term of the total law") {
  // The constant term of M' for TG(C, s2/2) must equal the unused-service
  // limit, otherwise the critical identity could not vanish on the limit.
  for (double c : {0.0, 0.5, -1.0, 3.0}) {
    const auto total = LimitDistribution::truncated_gaussian(c, 1.0);
    const double hazard = total.mgf_derivative(0.0) - c * total.mgf(0.0);
    CHECK(hazard == doctest::Approx(critical_unused_limit(c, 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("scaling maps a law onto the law of c X") {
  for (const auto& d : sample_laws()) {
    const auto s = d.scaled(2.0);
    CHECK(s.kind() == d.kind());
    CHECK(s.mean() == doctest::Approx(2.0 * d.mean()));
    CHECK(s.variance() == doctest::Approx(4.0 * d.variance()));
    CHECK(s.cdf(1.0) == doctest::Approx(d.cdf(0.5)).epsilon(1e-12));
  }
}

TEST_CASE("runtime quadrature handles finite and infinite ranges") {
  const auto r = integrate([](double x) { return std::exp(-x * x); }, -std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity());
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
  const auto s = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  CHECK(s.value == doctest::Approx(2.0).epsilon(1e-13));
  const auto sq = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  CHECK(sq.value == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0).value == 0.0);
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "jsqa/errors.hpp"
#include "jsqa/regimes.hpp"
#include "jsqa/simulator.hpp"

using namespace jsqa;
using jsqa::test::D;

namespace {

RegimeSpec spec(RegimeKind kind, double constant, double alpha, ArrivalFamily family = ArrivalFamily::binomial) {
  RegimeSpec s;
  s.kind = kind;
  s.constant = constant;
  s.alpha = alpha;
  s.base_services = {D::binomial(2, 0.25), D::binomial(2, 0.25)};
  s.bound = 4;
  s.arrival_family = family;
  return s;
}

}  // namespace

TEST_SUITE("regimes") {

TEST_CASE("build_config examples") {
  const auto classic = build_config(spec(RegimeKind::classic, 0.5, 0.25), 1e-4);
  CHECK(classic.drift() == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(classic.arrivals.mean() == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(classic.n == 2);
  CHECK(classic.gamma == 1e-4);
  CHECK(classic.bound() == 4);

  for (double g : {0.5, 0.01, 1e-6}) {
    const auto critical = build_config(spec(RegimeKind::critical, 0.0, 0.5), g);
    CHECK(critical.arrivals.mean() == doctest::Approx(1.0).epsilon(1e-15));
  }

  const auto over = build_config(spec(RegimeKind::overloaded, 0.2, 0.0), 0.01);
  CHECK(over.drift() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(over.arrivals.mean() == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(over.drift() / over.gamma == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("arrival families") {
  const auto b = build_config(spec(RegimeKind::critical, 0.0, 0.5), 0.01);
  CHECK(b.arrivals == D::binomial(4, 0.25));
  const auto s = build_config(spec(RegimeKind::critical, 0.0, 0.5, ArrivalFamily::bernoulli_scaled), 0.01);
  CHECK(s.arrivals == D::bernoulli_scaled(4, 0.25));
  CHECK(s.arrivals.variance() == doctest::Approx(3.0));
}

TEST_CASE("build_config errors") {
  const auto c = spec(RegimeKind::critical, 0.0, 0.5);
  CHECK_THROWS_AS(build_config(c, 0.0), OutOfRangeError);
  CHECK_THROWS_AS(build_config(c, 1.0), OutOfRangeError);
  // lambda = 1 + 40 * 0.1 = 5 > A.
  CHECK_THROWS_AS(build_config(spec(RegimeKind::critical, 40.0, 0.5), 0.01), OutOfRangeError);
  CHECK_THROWS_AS(build_config(spec(RegimeKind::classic, 10.0, 0.25), 0.5), OutOfRangeError);
}

TEST_CASE("regime spec invariants") {
  CHECK_THROWS_AS(spec(RegimeKind::classic, -0.5, 0.25).validate(), ValidationError);
  CHECK_THROWS_AS(spec(RegimeKind::classic, 0.5, 0.5).validate(), ValidationError);
  CHECK_THROWS_AS(spec(RegimeKind::classic, 0.5, 0.0).validate(), ValidationError);
  CHECK_THROWS_AS(spec(RegimeKind::critical, 0.0, 0.25).validate(), ValidationError);
  CHECK_NOTHROW(spec(RegimeKind::critical, -1.5, 0.5).validate());
  CHECK_THROWS_AS(spec(RegimeKind::overloaded, 0.0, 0.0).validate(), ValidationError);
  CHECK_NOTHROW(spec(RegimeKind::overloaded, 0.3, 0.0).validate());
  CHECK_THROWS_AS(spec(RegimeKind::overloaded, 0.3, 0.5).validate(), ValidationError);
  auto small = spec(RegimeKind::critical, 0.0, 0.5);
  small.bound = 1;
  CHECK_THROWS_AS(small.validate(), ValidationError);
}

TEST_CASE("the drift sits exactly on the regime curve") {
  RngStream rng(1, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const double g = std::pow(10.0, -1.0 - 5.0 * rng.uniform());
    const int kind = static_cast<int>(rng.below(3));
    RegimeSpec s;
    double target = 0.0;
    if (kind == 0) {
      s = spec(RegimeKind::classic, 0.1 + 0.8 * rng.uniform(), 0.01 + 0.48 * rng.uniform());
      target = -s.constant * std::pow(g, s.alpha);
    } else if (kind == 1) {
      s = spec(RegimeKind::critical, -2.0 + 4.0 * rng.uniform(), 0.5);
      target = s.constant * std::sqrt(g);
    } else {
      s = spec(RegimeKind::overloaded, 0.05 + 0.9 * rng.uniform(), 0.49 * rng.uniform());
      target = s.constant * std::pow(g, s.alpha);
    }
    const auto c = build_config(s, g);
    CHECK(std::abs(c.drift() - target) <= 1e-12 * std::max(std::abs(target), 1e-300) + 4e-16);
  }
}

TEST_CASE("scale examples") {
  const auto classic = spec(RegimeKind::classic, 0.5, 0.25);
  const std::vector<std::int64_t> q{100, 100};
  const auto x = scale(q, classic, 1e-4);
  CHECK(x.x[0] == doctest::Approx(10.0));
  CHECK(x.x[1] == doctest::Approx(10.0));
  CHECK(x.x_total == doctest::Approx(20.0));

  auto critical = spec(RegimeKind::critical, 0.0, 0.5);
  critical.base_services = {D::binomial(2, 0.25)};
  const std::vector<std::int64_t> q30{30};
  CHECK(scale(q30, critical, 0.01).x[0] == doctest::Approx(3.0));

  const auto over = spec(RegimeKind::overloaded, 0.2, 0.0);
  CHECK(centering(over, 0.01) == doctest::Approx(10.0));
  const std::vector<std::int64_t> q2{12, 9};
  const auto y = scale(q2, over, 0.01);
  CHECK(y.x[0] == doctest::Approx(0.2));
  CHECK(y.x[1] == doctest::Approx(-0.1));
  CHECK(y.x_total == doctest::Approx(0.1));
}

TEST_CASE("scale then unscale is the identity, classic and critical stay nonnegative") {
  RngStream rng(2, 0);
  const std::vector<RegimeSpec> specs{spec(RegimeKind::classic, 0.5, 0.25), spec(RegimeKind::critical, 0.7, 0.5),
                                      spec(RegimeKind::overloaded, 0.2, 0.1)};
  for (const auto& s : specs)
    for (double g : {0.3, 1e-2, 1e-4, 1e-6}) {
      for (int i = 0; i < 500; ++i) {
        const std::vector<std::int64_t> q{static_cast<std::int64_t>(rng.below(100000)),
                                          static_cast<std::int64_t>(rng.below(100000))};
        const auto x = scale(q, s, g);
        REQUIRE(unscale(x, s, g) == q);
        if (s.kind != RegimeKind::overloaded) {
          CHECK(x.x[0] >= 0.0);
          CHECK(x.x[1] >= 0.0);
        }
      }
    }
}

TEST_CASE("scaled sample sets keep replica boundaries") {
  const auto s = spec(RegimeKind::critical, 0.0, 0.5);
  const auto c = build_config(s, 0.05);
  const auto samples = collect_steady_state(c, {20, 100, 20, 2}, 4);
  const auto x = scale(samples, s, 0.05);
  CHECK(x.size() == samples.size());
  CHECK(std::vector<std::size_t>(x.replica_offsets().begin(), x.replica_offsets().end()) ==
        std::vector<std::size_t>(samples.replica_offsets().begin(), samples.replica_offsets().end()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x.total(i) == doctest::Approx(std::sqrt(0.05) * static_cast<double>(samples.total(i))));
    CHECK(x.at(i).x == scale(samples.q(i), s, 0.05).x);
  }
  CHECK(x.column(1).size() == x.size());
  CHECK_THROWS_AS(x.at(x.size()), OutOfRangeError);
  auto one = s;
  one.base_services = {D::binomial(2, 0.25)};
  CHECK_THROWS_AS(scale(samples, one, 0.05), DimensionError);
}

TEST_CASE("limit variance examples") {
  const auto classic = limit_sigma2(spec(RegimeKind::classic, 0.5, 0.25));
  CHECK(classic.sigma2 == doctest::Approx(1.5));
  CHECK(classic.bar_sigma2 == doctest::Approx(1.5));
  const auto over = limit_sigma2(spec(RegimeKind::overloaded, 0.2, 0.0));
  CHECK(over.sigma2 == doctest::Approx(1.59));
  CHECK(over.bar_sigma2 == doctest::Approx(1.79));
  const auto over_pos = limit_sigma2(spec(RegimeKind::overloaded, 0.2, 0.2));
  CHECK(over_pos.bar_sigma2 == doctest::Approx(1.5));
  const auto critical = limit_sigma2(spec(RegimeKind::critical, 1.3, 0.5));
  CHECK(critical.bar_sigma2 == critical.sigma2);
  CHECK(critical.sigma2 == doctest::Approx(1.5));
  const auto bern = limit_sigma2(spec(RegimeKind::critical, 0.0, 0.5, ArrivalFamily::bernoulli_scaled));
  CHECK(bern.sigma2 == doctest::Approx(3.75));
}

TEST_CASE("limit variance is the gamma -> 0 limit of the config variance") {
  for (const auto& s : {spec(RegimeKind::classic, 0.5, 0.25), spec(RegimeKind::critical, 0.5, 0.5),
                        spec(RegimeKind::overloaded, 0.2, 0.0), spec(RegimeKind::overloaded, 0.2, 0.3)}) {
    const auto lim = limit_sigma2(s);
    CHECK(build_config(s, 1e-12).variance() == doctest::Approx(lim.sigma2).epsilon(1e-3));
  }
}

TEST_CASE("regime JSON round trip") {
  const auto s = spec(RegimeKind::overloaded, 0.2, 0.1, ArrivalFamily::bernoulli_scaled);
  const auto back = regime_from_json(to_json(s));
  CHECK(back.kind == s.kind);
  CHECK(back.constant == s.constant);
  CHECK(back.alpha == s.alpha);
  CHECK(back.bound == s.bound);
  CHECK(back.arrival_family == s.arrival_family);
  CHECK(back.base_services == s.base_services);

  const auto j = nlohmann::json::parse(R"({"kind": "critical", "constant": 0, "bound": 4,
      "base_services": [{"kind": "binomial", "trial_count": 2, "success_probability": 0.25}]})");
  const auto c = regime_from_json(j);
  CHECK(c.alpha == 0.5);
  CHECK(c.arrival_family == ArrivalFamily::binomial);
  CHECK_THROWS_AS(regime_from_json(nlohmann::json::parse(R"({"kind": "lukewarm", "constant": 0, "bound": 4,
      "base_services": []})")),
                  ValidationError);
  CHECK_THROWS_AS(regime_kind_from_string("x"), ValidationError);
}

}  // TEST_SUITE

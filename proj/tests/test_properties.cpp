#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "jsqa/simulator.hpp"

using namespace jsqa;
using jsqa::test::D;

namespace {

D random_distribution(RngStream& rng, std::int64_t max_value) {
  const auto v = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_value)));
  const double p = 0.05 + 0.9 * rng.uniform();
  switch (rng.below(3)) {
    case 0: return D::constant(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_value) + 1)));
    case 1: return D::bernoulli_scaled(v, p);
    default: return D::binomial(v, p);
  }
}

SystemConfig random_config(RngStream& rng) {
  const int n = 1 + static_cast<int>(rng.below(4));
  std::vector<D> services;
  for (int i = 0; i < n; ++i) services.push_back(random_distribution(rng, 3));
  const double g = rng.below(4) == 0 ? 1.0 : std::pow(10.0, -3.0 * rng.uniform());
  return test::make_config(g, random_distribution(rng, 2 * n + 2), std::move(services));
}

}  // namespace

TEST_SUITE("properties") {

TEST_CASE("every slot conserves work and respects slackness") {
  RngStream meta(77, 0);
  std::int64_t slots = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto config = random_config(meta);
    CAPTURE(to_json(config).dump());
    SlotEngine engine(config);
    RngStream rng(static_cast<std::uint64_t>(trial), 1);
    std::vector<std::int64_t> q(static_cast<std::size_t>(config.n));
    for (auto& v : q) v = static_cast<std::int64_t>(meta.below(50));
    SlotOutcome o;
    bool ok = true;
    for (int t = 0; t < 5000; ++t, ++slots) {
      const auto before = q;
      std::int64_t before_total = 0;
      for (auto v : before) before_total += v;
      const auto totals = engine.advance(q, rng, o);
      std::int64_t after_total = 0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        after_total += q[i];
        const std::int64_t in = i == o.destination ? o.arrivals : 0;
        ok = ok && q[i] == before[i] + in - o.services[i] - o.abandonments[i] + o.unused[i];
        ok = ok && q[i] >= 0 && q[i] * o.unused[i] == 0;
        ok = ok && o.abandonments[i] >= 0 && o.abandonments[i] <= before[i];
        ok = ok && o.unused[i] >= 0 && o.unused[i] <= o.services[i];
        ok = ok && o.services[i] <= config.services[i].bound();
      }
      ok = ok && o.arrivals >= 0 && o.arrivals <= config.arrivals.bound();
      ok = ok && before[o.destination] == *std::min_element(before.begin(), before.end());
      ok = ok && after_total - before_total ==
                     o.arrivals - o.service_total() - o.abandonment_total() + o.unused_total();
      ok = ok && totals.unused == o.unused_total() && totals.abandoned == o.abandonment_total();
      if (!ok) break;
    }
    REQUIRE(ok);
  }
  CHECK(slots == 1'000'000);
}

TEST_CASE("the step function agrees with the engine") {
  RngStream meta(78, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto config = random_config(meta);
    SlotEngine engine(config);
    RngStream a(5, static_cast<std::uint64_t>(trial)), b(5, static_cast<std::uint64_t>(trial));
    QueueState s = QueueState::empty(config.n);
    std::vector<std::int64_t> q(s.q);
    SlotOutcome o;
    for (int t = 0; t < 200; ++t) {
      const auto [next, outcome] = step(s, config, a);
      engine.advance(q, b, o);
      REQUIRE(next.q == q);
      CHECK(outcome.unused == o.unused);
      s = next;
    }
  }
}

TEST_CASE("collected samples are reproducible from the seed") {
  RngStream meta(79, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto config = random_config(meta);
    const SamplingPlan plan{50, 100, 3, 3};
    const auto a = collect_steady_state(config, plan, static_cast<std::uint64_t>(trial));
    SimulationOptions two;
    two.threads = 2;
    CHECK(a == collect_steady_state(config, plan, static_cast<std::uint64_t>(trial), two));
    // num_samples counts retained samples over all replicas.
    CHECK(a.size() == 100);
    CHECK(a.replicas() == 3);
  }
}

}  // TEST_SUITE

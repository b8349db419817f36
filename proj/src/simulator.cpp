#include "jsqa/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "jsqa/errors.hpp"

namespace jsqa {

SamplingPlan SamplingPlan::defaults(const SystemConfig& config, std::int64_t num_samples, std::int64_t replicas) {
  SamplingPlan plan;
  plan.num_samples = num_samples;
  plan.replicas = replicas;
  plan.thinning = static_cast<std::int64_t>(std::ceil(1.0 / config.gamma));
  const double relax = 20.0 / (config.gamma + std::abs(config.drift()));
  const double warm = std::min(std::ceil(relax), static_cast<double>(kMaxWarmup));
  plan.warmup_slots = std::max(static_cast<std::int64_t>(warm), plan.thinning);
  return plan;
}

void SamplingPlan::validate() const {
  if (warmup_slots < 1) throw ValidationError("warmup_slots must be positive");
  if (num_samples < 1) throw ValidationError("num_samples must be positive");
  if (thinning < 1) throw ValidationError("thinning must be positive");
  if (replicas < 1) throw ValidationError("replicas must be positive");
  if (warmup_slots < thinning) throw ValidationError("warmup_slots must be at least thinning");
}

SampleSet SampleSet::from_samples(const std::vector<SteadyStateSample>& samples, std::size_t replicas) {
  SampleSet set(samples.empty() ? 1 : static_cast<int>(samples.front().q.size()));
  set.reserve(samples.size());
  replicas = std::max<std::size_t>(replicas, 1);
  const std::size_t per = samples.size() / replicas;
  const std::size_t extra = samples.size() % replicas;
  std::size_t pos = 0;
  for (std::size_t r = 0; r < replicas; ++r) {
    const std::size_t len = per + (r < extra ? 1 : 0);
    for (std::size_t i = 0; i < len; ++i, ++pos) {
      const auto& s = samples[pos];
      if (static_cast<int>(s.q.size()) != set.n_) throw DimensionError("samples have differing dimension");
      set.push_back(s.q, s.u_total, s.d_total);
    }
    set.end_replica();
  }
  return set;
}

std::int64_t SampleSet::total(std::size_t i) const noexcept {
  std::int64_t t = 0;
  for (auto v : q(i)) t += v;
  return t;
}

SteadyStateSample SampleSet::at(std::size_t i) const {
  if (i >= size()) throw OutOfRangeError("sample index out of range");
  const auto row = q(i);
  return {std::vector<std::int64_t>(row.begin(), row.end()), u_[i], d_[i]};
}

void SampleSet::reserve(std::size_t count) {
  q_.reserve(count * static_cast<std::size_t>(n_));
  u_.reserve(count);
  d_.reserve(count);
}

void SampleSet::push_back(std::span<const std::int64_t> q, std::int64_t u_total, std::int64_t d_total) {
  if (static_cast<int>(q.size()) != n_) throw DimensionError("sample dimension does not match set");
  if (!open_) {
    offsets_.push_back(size());
    open_ = true;
  }
  q_.insert(q_.end(), q.begin(), q.end());
  u_.push_back(u_total);
  d_.push_back(d_total);
  offsets_.back() = size();
}

void SampleSet::append(const SampleSet& other) {
  if (other.empty()) return;
  if (empty()) n_ = other.n_;
  if (other.n_ != n_) throw DimensionError("cannot append sample sets of different dimension");
  const std::size_t base = size();
  q_.insert(q_.end(), other.q_.begin(), other.q_.end());
  u_.insert(u_.end(), other.u_.begin(), other.u_.end());
  d_.insert(d_.end(), other.d_.begin(), other.d_.end());
  for (std::size_t r = 1; r < other.offsets_.size(); ++r) offsets_.push_back(base + other.offsets_[r]);
  open_ = false;
}

std::size_t jsq_dispatch(std::span<const std::int64_t> q, RngStream& rng) {
  if (q.size() == 2) {
    if (q[0] != q[1]) return q[1] < q[0] ? 1 : 0;
    return static_cast<std::size_t>(rng.below(2));
  }
  if (q.empty()) throw DimensionError("dispatch over zero queues");
  std::int64_t best = q[0];
  std::size_t ties = 1;
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i] < best) {
      best = q[i];
      ties = 1;
    } else if (q[i] == best) {
      ++ties;
    }
  }
  if (ties == 1) return static_cast<std::size_t>(std::find(q.begin(), q.end(), best) - q.begin());
  auto pick = rng.below(ties);
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == best && pick-- == 0) return i;
  }
  return 0;  // unreachable
}

std::vector<std::int64_t> sample_abandonments(const QueueState& q, double gamma, RngStream& rng) {
  std::vector<std::int64_t> d(q.size());
  FixedProbabilityBinomial draw(gamma);
  for (std::size_t i = 0; i < q.size(); ++i) d[i] = draw(q.q[i], rng);
  return d;
}

namespace {

constexpr std::size_t kMaxJointOutcomes = 4096;
constexpr double kSplitMeanLimit = 1.0;

}  // namespace

SlotEngine::SlotEngine(const SystemConfig& config, Fault fault)
    : config_(config),
      fault_(fault),
      abandon_(config.gamma),
      d_(static_cast<std::size_t>(std::max(config.n, 0)), 0),
      exposed_(d_.size(), 0),
      increments_(d_.size() + 1, 0) {
  const auto report = validate(config);
  if (!report.ok) throw ValidationError(report.violations.front());
  build_joint_table();
}

void SlotEngine::build_joint_table() {
  std::vector<const BoundedDistribution*> parts{&config_.arrivals};
  for (const auto& s : config_.services) parts.push_back(&s);
  double outcomes = 1.0;
  for (const auto* p : parts) outcomes *= static_cast<double>(p->support_max() + 1);
  if (outcomes > static_cast<double>(kMaxJointOutcomes)) return;

  // Enumerate the product support in mixed radix, keeping positive-mass cells.
  const std::size_t width = parts.size();
  std::vector<std::int64_t> digit(width, 0);
  double acc = 0.0;
  while (true) {
    double mass = 1.0;
    for (std::size_t k = 0; k < width; ++k) mass *= parts[k]->pmf(digit[k]);
    if (mass > 0.0) {
      acc += mass;
      joint_cdf_.push_back(acc);
      joint_values_.insert(joint_values_.end(), digit.begin(), digit.end());
    }
    std::size_t k = 0;
    while (k < width && ++digit[k] > parts[k]->support_max()) digit[k++] = 0;
    if (k == width) break;
  }
  // Guard the search against rounding in the running sum.
  joint_cdf_.back() = 1.0;
  const std::size_t cells = joint_cdf_.size();
  joint_guide_.resize(cells);
  std::size_t idx = 0;
  for (std::size_t g = 0; g < cells; ++g) {
    const double threshold = static_cast<double>(g) / static_cast<double>(cells);
    while (joint_cdf_[idx] <= threshold) ++idx;
    joint_guide_[g] = static_cast<std::uint32_t>(idx);
  }
}

void SlotEngine::draw_increments(RngStream& rng) {
  if (joint_cdf_.empty()) {
    increments_[0] = config_.arrivals.sample(rng);
    for (std::size_t i = 0; i < d_.size(); ++i) increments_[i + 1] = config_.services[i].sample(rng);
    return;
  }
  const double u = rng.uniform();
  const std::size_t cells = joint_cdf_.size();
  std::size_t idx = joint_guide_[static_cast<std::size_t>(u * static_cast<double>(cells))];
  while (u >= joint_cdf_[idx]) ++idx;
  const std::size_t width = increments_.size();
  const std::int64_t* cell = joint_values_.data() + idx * width;
  for (std::size_t k = 0; k < width; ++k) increments_[k] = cell[k];
}

void SlotEngine::draw_abandonments(std::span<const std::int64_t> q, RngStream& rng) {
  const std::size_t n = d_.size();
  std::int64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    exposed_[i] = fault_ == Fault::abandonment_skip_one ? std::max<std::int64_t>(q[i] - 1, 0) : q[i];
    total += exposed_[i];
  }
  if (n == 1 || static_cast<double>(total) * config_.gamma > kSplitMeanLimit) {
    for (std::size_t i = 0; i < n; ++i) d_[i] = abandon_(exposed_[i], rng);
    return;
  }
  for (auto& d : d_) d = 0;
  const std::int64_t marks = abandon_(total, rng);
  // Sequential draws without replacement over the exposed jobs.
  std::int64_t remaining = total;
  for (std::int64_t m = 0; m < marks; ++m, --remaining) {
    auto pick = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(remaining)));
    std::size_t i = 0;
    while (pick >= exposed_[i] - d_[i]) {
      pick -= exposed_[i] - d_[i];
      ++i;
    }
    ++d_[i];
  }
}

SlotEngine::Totals SlotEngine::run(std::span<std::int64_t> q, RngStream& rng, SlotOutcome* outcome) {
  const std::size_t n = d_.size();
  if (q.size() != n) throw DimensionError("state dimension does not match config");
  draw_abandonments(q, rng);
  const std::size_t dest = jsq_dispatch(std::span<const std::int64_t>(q.data(), n), rng);
  draw_increments(rng);
  const std::int64_t a = increments_[0];
  if (outcome) {
    outcome->arrivals = a;
    outcome->destination = dest;
    outcome->services.assign(increments_.begin() + 1, increments_.end());
    outcome->abandonments.assign(d_.begin(), d_.end());
    outcome->unused.resize(n);
  }
  Totals totals;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t next = q[i] + (i == dest ? a : 0) - increments_[i + 1] - d_[i];
    const std::int64_t u = next < 0 ? -next : 0;
    q[i] = next + u;
    totals.unused += u;
    totals.abandoned += d_[i];
    if (outcome) outcome->unused[i] = u;
  }
  return totals;
}

std::pair<QueueState, SlotOutcome> step(const QueueState& q, const SystemConfig& config, RngStream& rng) {
  SlotEngine engine(config);
  QueueState next = q;
  SlotOutcome outcome;
  engine.advance(next.q, rng, outcome);
  return {std::move(next), std::move(outcome)};
}

namespace {

SampleSet run_replica(const SystemConfig& config, const SamplingPlan& plan, std::int64_t samples, RngStream rng,
                      Fault fault) {
  SlotEngine engine(config, fault);
  std::vector<std::int64_t> q(static_cast<std::size_t>(config.n), 0);
  for (std::int64_t t = 0; t < plan.warmup_slots - plan.thinning; ++t) engine.advance(q, rng);
  SampleSet out(config.n);
  out.reserve(static_cast<std::size_t>(samples));
  for (std::int64_t k = 0; k < samples; ++k) {
    SlotEngine::Totals last;
    for (std::int64_t t = 0; t < plan.thinning; ++t) last = engine.advance(q, rng);
    out.push_back(q, last.unused, last.abandoned);
  }
  out.end_replica();
  return out;
}

}  // namespace

SampleSet collect_steady_state(const SystemConfig& config, const SamplingPlan& plan, std::uint64_t seed,
                               const SimulationOptions& options) {
  plan.validate();
  const auto report = validate(config);
  if (!report.ok) throw ValidationError(report.violations.front());
  const auto entries = static_cast<double>(plan.num_samples) * static_cast<double>(config.n);
  if (entries > static_cast<double>(options.memory_cap_entries))
    throw ResourceLimitError("requested " + std::to_string(plan.num_samples) + " samples of dimension " +
                             std::to_string(config.n) + " exceed the memory cap of " +
                             std::to_string(options.memory_cap_entries) + " entries");

  const auto replicas = static_cast<std::size_t>(plan.replicas);
  std::vector<std::int64_t> counts(replicas, plan.num_samples / plan.replicas);
  for (std::size_t r = 0; r < static_cast<std::size_t>(plan.num_samples % plan.replicas); ++r) ++counts[r];

  std::vector<SampleSet> parts(replicas);
  auto work = [&](std::size_t r) {
    if (counts[r] == 0) return;
    parts[r] = run_replica(config, plan, counts[r], RngStream(seed, options.stream_base + r), options.fault);
  };

  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, replicas);
  if (workers == 1) {
    for (std::size_t r = 0; r < replicas; ++r) work(r);
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          std::size_t r;
          {
            std::lock_guard lock(mu);
            if (next >= replicas || failure) return;
            r = next++;
          }
          try {
            work(r);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  SampleSet merged(config.n);
  merged.reserve(static_cast<std::size_t>(plan.num_samples));
  for (auto& part : parts) merged.append(part);
  return merged;
}

CouplingBounds CouplingBounds::for_config(const SystemConfig& config) {
  const double nu = config.drift();
  const double slack = static_cast<double>(config.bound()) * std::sqrt(config.gamma);
  return {nu + slack, std::max(nu - slack, 0.0)};
}

DominationReport simulate_coupled_domination(const SystemConfig& config, const CouplingBounds& bounds,
                                             std::int64_t horizon, std::uint64_t seed) {
  if (config.n != 1) throw DimensionError("coupled domination is defined for a single server");
  const auto report = validate(config);
  if (!report.ok) throw ValidationError(report.violations.front());
  if (horizon < 0) throw ValidationError("horizon must be nonnegative");
  if (!(bounds.upper >= 0.0 && bounds.lower >= 0.0)) throw ValidationError("coupling bounds must be nonnegative");

  const double g = config.gamma;
  const double cap_real = std::floor(bounds.upper / g);
  const double floor_real = std::ceil(bounds.lower / g);
  constexpr double kHuge = 4.0e18;
  const auto cap = static_cast<std::int64_t>(std::min(cap_real, kHuge));
  const auto floor_level = static_cast<std::int64_t>(std::min(floor_real, kHuge));

  RngStream rng(seed, 0);
  FixedProbabilityBinomial draw(g);
  std::int64_t q = 0, hi = 0, lo = 0;
  DominationReport out;
  for (std::int64_t t = 0; t < horizon; ++t) {
    // Every chain marks the same Bernoulli(gamma) sequence and abandons the
    // marks within its exposed prefix, so counts over nested prefixes are
    // sampled as increments.
    std::array<std::int64_t, 3> exposed{q, std::min(cap, hi), std::max(floor_level, lo)};
    std::array<std::size_t, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return exposed[x] < exposed[y]; });
    std::array<std::int64_t, 3> d{};
    std::int64_t prefix = 0, marked = 0;
    for (auto idx : order) {
      marked += draw(exposed[idx] - prefix, rng);
      prefix = exposed[idx];
      d[idx] = marked;
    }
    const std::int64_t net = config.arrivals.sample(rng) - config.services[0].sample(rng);
    q = std::max<std::int64_t>(q + net - d[0], 0);
    hi = std::max<std::int64_t>(hi + net - d[1], 0);
    lo = std::max<std::int64_t>(lo + net - d[2], 0);
    ++out.slots_checked;
    out.max_queue = std::max(out.max_queue, q);
    if (q > hi) {
      ++out.upper_violations;
      out.max_violation = std::max(out.max_violation, q - hi);
    }
    if (lo > q) {
      ++out.lower_violations;
      out.max_violation = std::max(out.max_violation, lo - q);
    }
  }
  return out;
}

}  // namespace jsqa

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "jsqa/binomial.hpp"
#include "jsqa/config.hpp"
#include "jsqa/rng.hpp"
#include "jsqa/stats.hpp"

namespace jsqa {

struct SteadyStateSample {
  std::vector<std::int64_t> q;
  /// Unused service and abandonments of the slot that ended in this state.
  std::int64_t u_total = 0;
  std::int64_t d_total = 0;

  friend bool operator==(const SteadyStateSample&, const SteadyStateSample&) = default;
};

struct SamplingPlan {
  std::int64_t warmup_slots = 1;
  std::int64_t num_samples = 1;
  std::int64_t thinning = 1;
  std::int64_t replicas = 1;

  static constexpr std::int64_t kMaxWarmup = 100'000'000;

  /// thinning = ceil(1/gamma); warmup = max(ceil(20/(gamma+|nu|)), thinning),
  /// capped at kMaxWarmup.
  static SamplingPlan defaults(const SystemConfig& config, std::int64_t num_samples, std::int64_t replicas);

  /// Throws ValidationError unless every field is positive and
  /// warmup_slots >= thinning.
  void validate() const;
};

/// Samples from one or more independent replicas stored back to back, with
/// queue vectors in one flat buffer.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(int n) : n_(n) {}

  static SampleSet from_samples(const std::vector<SteadyStateSample>& samples, std::size_t replicas = 1);

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return u_.size(); }
  bool empty() const noexcept { return u_.empty(); }

  std::span<const std::int64_t> q(std::size_t i) const noexcept {
    return {q_.data() + i * static_cast<std::size_t>(n_), static_cast<std::size_t>(n_)};
  }
  std::int64_t queue(std::size_t i, std::size_t k) const noexcept { return q_[i * static_cast<std::size_t>(n_) + k]; }
  std::int64_t total(std::size_t i) const noexcept;
  std::int64_t u_total(std::size_t i) const noexcept { return u_[i]; }
  std::int64_t d_total(std::size_t i) const noexcept { return d_[i]; }
  SteadyStateSample at(std::size_t i) const;

  std::size_t replicas() const noexcept { return offsets_.size() - 1; }
  /// Replica boundaries: replicas()+1 entries, first 0, last size().
  std::span<const std::size_t> replica_offsets() const noexcept { return offsets_; }
  BatchLayout batches(std::size_t per_replica = BatchLayout::kDefaultBatchesPerReplica) const {
    return BatchLayout::for_replicas(offsets_, per_replica);
  }

  void reserve(std::size_t count);
  void push_back(std::span<const std::int64_t> q, std::int64_t u_total, std::int64_t d_total);
  /// Closes the current replica; the next push_back starts a new one.
  void end_replica() noexcept { open_ = false; }
  /// Appends every replica of `other` as separate replicas.
  void append(const SampleSet& other);

  friend bool operator==(const SampleSet& a, const SampleSet& b) noexcept {
    return a.n_ == b.n_ && a.q_ == b.q_ && a.u_ == b.u_ && a.d_ == b.d_ && a.offsets_ == b.offsets_;
  }

 private:
  int n_ = 1;
  std::vector<std::int64_t> q_;
  std::vector<std::int64_t> u_;
  std::vector<std::int64_t> d_;
  std::vector<std::size_t> offsets_{0};
  bool open_ = false;
};

/// Deliberate model corruptions, used only to check that the oracle
/// comparison detects a broken simulator.
enum class Fault { none, abandonment_skip_one };

struct SimulationOptions {
  unsigned threads = 1;
  /// Upper limit on num_samples * n stored queue entries.
  std::size_t memory_cap_entries = 250'000'000;
  Fault fault = Fault::none;
  /// Replica r uses stream id stream_base + r.
  std::uint64_t stream_base = 0;
};

/// Index of a shortest queue, ties broken uniformly. Draws randomness only
/// when more than one queue attains the minimum.
std::size_t jsq_dispatch(std::span<const std::int64_t> q, RngStream& rng);
inline std::size_t jsq_dispatch(const QueueState& q, RngStream& rng) { return jsq_dispatch(std::span(q.q), rng); }

/// d_i ~ Binomial(q_i, gamma), independently over i.
std::vector<std::int64_t> sample_abandonments(const QueueState& q, double gamma, RngStream& rng);

/// Exact one-slot evolution. Within a slot: abandonments from the pre-slot
/// state, JSQ dispatch on the pre-slot state, arrivals, then services.
///
/// Two sampling shortcuts keep the per-slot draw count low without changing
/// the law. When the joint support of (a, s_1..s_n) is small it is drawn by
/// one inversion of the product distribution. When few abandonments are
/// expected the total is drawn as Bin(sum q, gamma) and spread over the
/// queues as a uniformly random subset of jobs, which is the joint law of
/// independent per-queue binomials.
class SlotEngine {
 public:
  explicit SlotEngine(const SystemConfig& config, Fault fault = Fault::none);

  struct Totals {
    std::int64_t unused = 0;
    std::int64_t abandoned = 0;
  };

  /// Advances q in place.
  Totals advance(std::span<std::int64_t> q, RngStream& rng) { return run(q, rng, nullptr); }
  /// Advances q in place and records the full decomposition. Consumes the
  /// same randomness as the totals-only overload.
  Totals advance(std::span<std::int64_t> q, RngStream& rng, SlotOutcome& outcome) {
    return run(q, rng, &outcome);
  }

  const SystemConfig& config() const noexcept { return config_; }

 private:
  Totals run(std::span<std::int64_t> q, RngStream& rng, SlotOutcome* outcome);
  void draw_abandonments(std::span<const std::int64_t> q, RngStream& rng);
  void draw_increments(RngStream& rng);
  void build_joint_table();

  SystemConfig config_;
  Fault fault_;
  FixedProbabilityBinomial abandon_;
  std::vector<std::int64_t> d_;
  std::vector<std::int64_t> exposed_;
  // increments_[0] = arrivals, increments_[1 + i] = service of queue i.
  std::vector<std::int64_t> increments_;
  // Joint table: cumulative masses, guide index, packed outcomes.
  std::vector<double> joint_cdf_;
  std::vector<std::uint32_t> joint_guide_;
  std::vector<std::int64_t> joint_values_;
};

std::pair<QueueState, SlotOutcome> step(const QueueState& q, const SystemConfig& config, RngStream& rng);

/// Independent chains from the empty state, one stream per replica. Each
/// replica discards warmup_slots slots, then keeps one state every
/// `thinning` slots. Output is independent of the thread count.
SampleSet collect_steady_state(const SystemConfig& config, const SamplingPlan& plan, std::uint64_t seed,
                               const SimulationOptions& options = {});

/// Abandonment truncation levels of the coupled single-server chains: the
/// upper chain lets at most floor(upper/gamma) jobs be exposed to
/// abandonment, the lower chain at least ceil(lower/gamma).
struct CouplingBounds {
  double upper = 0.0;
  double lower = 0.0;

  /// upper = nu + A sqrt(gamma), lower = max(nu - A sqrt(gamma), 0).
  static CouplingBounds for_config(const SystemConfig& config);
};

struct DominationReport {
  std::int64_t slots_checked = 0;
  std::int64_t upper_violations = 0;  // slots with q > q_upper
  std::int64_t lower_violations = 0;  // slots with q_lower > q
  std::int64_t max_violation = 0;
  std::int64_t max_queue = 0;

  bool holds() const noexcept { return upper_violations == 0 && lower_violations == 0; }
};

/// Runs q, the capped chain and the floored chain on shared arrivals,
/// services and abandonment marks. Requires n == 1.
DominationReport simulate_coupled_domination(const SystemConfig& config, const CouplingBounds& bounds,
                                             std::int64_t horizon, std::uint64_t seed);

}  // namespace jsqa

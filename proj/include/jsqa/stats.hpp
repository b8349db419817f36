#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace jsqa {

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Contiguous batches over a sample sequence that is the concatenation of
/// independent replicas. Batches never straddle a replica boundary.
class BatchLayout {
 public:
  static constexpr std::size_t kDefaultBatchesPerReplica = 32;

  BatchLayout() = default;
  /// `replica_offsets` has one entry per replica plus a final end offset.
  static BatchLayout for_replicas(std::span<const std::size_t> replica_offsets,
                                  std::size_t batches_per_replica = kDefaultBatchesPerReplica);

  std::size_t size() const noexcept { return ranges_.size(); }
  const std::vector<std::pair<std::size_t, std::size_t>>& ranges() const noexcept { return ranges_; }

  /// Batch averages of value(i) for every sample index i.
  template <class F>
  std::vector<double> averages(F&& value) const {
    std::vector<double> out;
    out.reserve(ranges_.size());
    for (const auto& [begin, end] : ranges_) {
      double acc = 0.0;
      for (std::size_t i = begin; i < end; ++i) acc += value(i);
      out.push_back(acc / static_cast<double>(end - begin));
    }
    return out;
  }

 private:
  std::vector<std::pair<std::size_t, std::size_t>> ranges_;
};

/// Standard error of the grand mean from batch averages: sd(batches)/sqrt(B).
/// Zero when fewer than two batches exist.
double batch_stderr(std::span<const double> batch_averages);

/// Mean over all samples plus batch-means standard error.
template <class F>
Estimate batch_estimate(const BatchLayout& layout, std::size_t count, F&& value) {
  Estimate e;
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) total += value(i);
  e.mean = count ? total / static_cast<double>(count) : 0.0;
  const auto batches = layout.averages(value);
  e.std_error = batch_stderr(batches);
  return e;
}

}  // namespace jsqa

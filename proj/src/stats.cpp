#include "jsqa/stats.hpp"

#include <cmath>

namespace jsqa {

BatchLayout BatchLayout::for_replicas(std::span<const std::size_t> offsets, std::size_t batches_per_replica) {
  BatchLayout layout;
  if (batches_per_replica == 0) batches_per_replica = 1;
  for (std::size_t r = 0; r + 1 < offsets.size(); ++r) {
    const std::size_t begin = offsets[r];
    const std::size_t count = offsets[r + 1] - begin;
    if (count == 0) continue;
    const std::size_t batches = std::min(batches_per_replica, count);
    // Spread the remainder over the leading batches so sizes differ by at most one.
    const std::size_t base = count / batches;
    const std::size_t extra = count % batches;
    std::size_t pos = begin;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t len = base + (b < extra ? 1 : 0);
      layout.ranges_.emplace_back(pos, pos + len);
      pos += len;
    }
  }
  return layout;
}

double batch_stderr(std::span<const double> batch_averages) {
  const std::size_t b = batch_averages.size();
  if (b < 2) return 0.0;
  double mean = 0.0;
  for (double x : batch_averages) mean += x;
  mean /= static_cast<double>(b);
  double ss = 0.0;
  for (double x : batch_averages) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
}

}  // namespace jsqa

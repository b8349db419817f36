#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace jsqa {

/// Philox4x32-10 block function. Counter-based: output depends only on
/// (counter, key), so any position of any stream is addressable directly.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                          std::array<std::uint32_t, 2> key) noexcept;

/// Deterministic random stream identified by (seed, stream id).
///
/// The seed is the Philox key, the stream id occupies the upper half of the
/// 128-bit counter and the lower half counts blocks. Streams with distinct
/// ids never share a counter value, so replicas need no shared state.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  /// Number of 64-bit words consumed so far.
  std::uint64_t position() const noexcept { return 2 * block_ - (kBufferWords - index_); }

  /// Word 2b is the low half of block b, word 2b+1 the high half.
  std::uint64_t next_u64() noexcept {
    if (index_ == kBufferWords) refill();
    return buffer_[index_++];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, k). k must be positive.
  std::uint64_t below(std::uint64_t k) noexcept;

  friend bool operator==(const RngStream& a, const RngStream& b) noexcept {
    return a.seed_ == b.seed_ && a.stream_id_ == b.stream_id_ && a.position() == b.position();
  }

 private:
  static constexpr std::size_t kBlocksPerRefill = 8;
  static constexpr std::size_t kBufferWords = 2 * kBlocksPerRefill;

  // Computes the next kBlocksPerRefill blocks at once; the lanes are
  // independent, which lets the rounds overlap.
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;  // first block not yet generated
  std::array<std::uint64_t, kBufferWords> buffer_{};
  std::size_t index_ = kBufferWords;
};

}  // namespace jsqa

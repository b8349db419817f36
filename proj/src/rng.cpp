#include "jsqa/rng.hpp"

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

namespace jsqa {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c,
                                          std::array<std::uint32_t, 2> k) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

#if defined(__SSE2__)

namespace {

// Four lanes of the 32x32->64 multiply: returns (hi, lo) halves per lane.
inline void mulhilo4(__m128i a, __m128i m, __m128i& hi, __m128i& lo) {
  const __m128i even = _mm_mul_epu32(a, m);
  const __m128i odd = _mm_mul_epu32(_mm_srli_epi64(a, 32), m);
  const __m128i low_mask = _mm_set_epi32(0, -1, 0, -1);
  hi = _mm_or_si128(_mm_srli_epi64(even, 32), _mm_andnot_si128(low_mask, odd));
  lo = _mm_or_si128(_mm_and_si128(even, low_mask), _mm_slli_epi64(odd, 32));
}

}  // namespace

void RngStream::refill() noexcept {
  static_assert(kBlocksPerRefill % 4 == 0);
  constexpr std::size_t G = kBlocksPerRefill / 4;
  __m128i c0[G], c1[G], c2[G], c3[G];
  for (std::size_t g = 0; g < G; ++g) {
    alignas(16) std::uint32_t lo[4], hi[4];
    for (std::size_t l = 0; l < 4; ++l) {
      const std::uint64_t b = block_ + 4 * g + l;
      lo[l] = static_cast<std::uint32_t>(b);
      hi[l] = static_cast<std::uint32_t>(b >> 32);
    }
    c0[g] = _mm_load_si128(reinterpret_cast<const __m128i*>(lo));
    c1[g] = _mm_load_si128(reinterpret_cast<const __m128i*>(hi));
    c2[g] = _mm_set1_epi32(static_cast<int>(static_cast<std::uint32_t>(stream_id_)));
    c3[g] = _mm_set1_epi32(static_cast<int>(static_cast<std::uint32_t>(stream_id_ >> 32)));
  }
  const __m128i m0 = _mm_set1_epi32(static_cast<int>(kMul0));
  const __m128i m1 = _mm_set1_epi32(static_cast<int>(kMul1));
  std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
  for (int round = 0; round < 10; ++round) {
    const __m128i key0 = _mm_set1_epi32(static_cast<int>(k0));
    const __m128i key1 = _mm_set1_epi32(static_cast<int>(k1));
    for (std::size_t g = 0; g < G; ++g) {
      __m128i hi0, lo0, hi1, lo1;
      mulhilo4(c0[g], m0, hi0, lo0);
      mulhilo4(c2[g], m1, hi1, lo1);
      c0[g] = _mm_xor_si128(_mm_xor_si128(hi1, c1[g]), key0);
      c2[g] = _mm_xor_si128(_mm_xor_si128(hi0, c3[g]), key1);
      c1[g] = lo1;
      c3[g] = lo0;
    }
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  for (std::size_t g = 0; g < G; ++g) {
    // Interleave to per-block words (c0|c1<<32, c2|c3<<32).
    const __m128i w01_lo = _mm_unpacklo_epi32(c0[g], c1[g]);  // lanes 0,1 first words
    const __m128i w01_hi = _mm_unpackhi_epi32(c0[g], c1[g]);  // lanes 2,3 first words
    const __m128i w23_lo = _mm_unpacklo_epi32(c2[g], c3[g]);
    const __m128i w23_hi = _mm_unpackhi_epi32(c2[g], c3[g]);
    auto* out = reinterpret_cast<__m128i*>(buffer_.data() + 8 * g);
    _mm_storeu_si128(out + 0, _mm_unpacklo_epi64(w01_lo, w23_lo));  // lane 0: first, second
    _mm_storeu_si128(out + 1, _mm_unpackhi_epi64(w01_lo, w23_lo));  // lane 1
    _mm_storeu_si128(out + 2, _mm_unpacklo_epi64(w01_hi, w23_hi));  // lane 2
    _mm_storeu_si128(out + 3, _mm_unpackhi_epi64(w01_hi, w23_hi));  // lane 3
  }
  block_ += kBlocksPerRefill;
  index_ = 0;
}

#else

void RngStream::refill() noexcept {
  constexpr std::size_t L = kBlocksPerRefill;
  std::uint32_t c0[L], c1[L], c2[L], c3[L];
  for (std::size_t l = 0; l < L; ++l) {
    const std::uint64_t b = block_ + l;
    c0[l] = static_cast<std::uint32_t>(b);
    c1[l] = static_cast<std::uint32_t>(b >> 32);
    c2[l] = static_cast<std::uint32_t>(stream_id_);
    c3[l] = static_cast<std::uint32_t>(stream_id_ >> 32);
  }
  std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
  for (int round = 0; round < 10; ++round) {
    for (std::size_t l = 0; l < L; ++l) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0[l];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2[l];
      const auto n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[l] ^ k0;
      const auto n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[l] ^ k1;
      c1[l] = static_cast<std::uint32_t>(p1);
      c3[l] = static_cast<std::uint32_t>(p0);
      c0[l] = n0;
      c2[l] = n2;
    }
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  for (std::size_t l = 0; l < L; ++l) {
    buffer_[2 * l] = (static_cast<std::uint64_t>(c1[l]) << 32) | c0[l];
    buffer_[2 * l + 1] = (static_cast<std::uint64_t>(c3[l]) << 32) | c2[l];
  }
  block_ += L;
  index_ = 0;
}

#endif

std::uint64_t RngStream::below(std::uint64_t k) noexcept {
  // Lemire's multiply-shift with rejection; exact for every k.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * k;
  auto low = static_cast<std::uint64_t>(m);
  if (low < k) {
    const std::uint64_t threshold = (0 - k) % k;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * k;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace jsqa

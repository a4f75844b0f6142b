// Compiled with -mavx2 -mfma -mpopcnt; only reached after a runtime CPU check.

#include <immintrin.h>

#include <bit>

#include "boltssi/kernels.hpp"

namespace boltssi::kernels::avx2 {

namespace {

// Per-byte popcount via 4-bit table lookup, folded into four 64-bit lanes.
inline __m256i popcount_lanes(__m256i v) {
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                       0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low_mask);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  const __m256i bytes =
      _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
  return _mm256_sad_epu8(bytes, _mm256_setzero_si256());
}

inline std::uint64_t horizontal_sum(__m256i acc) {
  const __m128i s = _mm_add_epi64(_mm256_castsi256_si128(acc), _mm256_extracti128_si256(acc, 1));
  return static_cast<std::uint64_t>(_mm_cvtsi128_si64(s)) +
         static_cast<std::uint64_t>(_mm_extract_epi64(s, 1));
}

inline double horizontal_sum(__m256d v) {
  const __m128d s = _mm_add_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

std::uint64_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t w = 0;
  for (; w + 4 <= words; w += 4) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + w));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + w));
    acc = _mm256_add_epi64(acc, popcount_lanes(_mm256_and_si256(va, vb)));
  }
  std::uint64_t total = horizontal_sum(acc);
  for (; w < words; ++w) total += std::popcount(a[w] & b[w]);
  return total;
}

void cross_counts(const std::uint64_t* block_a, unsigned rows_a, const std::uint64_t* block_b,
                  unsigned rows_b, std::size_t stride, std::size_t begin, std::size_t words,
                  std::uint32_t* out) {
  for (unsigned ra = 0; ra < rows_a; ++ra) {
    const std::uint64_t* row_a = block_a + ra * stride + begin;
    for (unsigned rb = 0; rb < rows_b; ++rb) {
      const std::uint64_t* row_b = block_b + rb * stride + begin;
      out[ra * rows_b + rb] = static_cast<std::uint32_t>(and_popcount(row_a, row_b, words));
    }
  }
}

PairMoments pair_moments(const double* a, const double* b, const double* y, std::size_t n) {
  __m256d sw = _mm256_setzero_pd();
  __m256d saw = _mm256_setzero_pd();
  __m256d sbw = _mm256_setzero_pd();
  __m256d sww = _mm256_setzero_pd();
  __m256d swy = _mm256_setzero_pd();
  std::size_t r = 0;
  for (; r + 4 <= n; r += 4) {
    const __m256d va = _mm256_loadu_pd(a + r);
    const __m256d vb = _mm256_loadu_pd(b + r);
    const __m256d vy = _mm256_loadu_pd(y + r);
    const __m256d w = _mm256_mul_pd(va, vb);
    sw = _mm256_add_pd(sw, w);
    saw = _mm256_fmadd_pd(va, w, saw);
    sbw = _mm256_fmadd_pd(vb, w, sbw);
    sww = _mm256_fmadd_pd(w, w, sww);
    swy = _mm256_fmadd_pd(w, vy, swy);
  }
  PairMoments m{horizontal_sum(sw), horizontal_sum(saw), horizontal_sum(sbw),
                horizontal_sum(sww), horizontal_sum(swy)};
  for (; r < n; ++r) {
    const double w = a[r] * b[r];
    m.w += w;
    m.aw += a[r] * w;
    m.bw += b[r] * w;
    m.ww += w * w;
    m.wy += w * y[r];
  }
  return m;
}

}  // namespace boltssi::kernels::avx2

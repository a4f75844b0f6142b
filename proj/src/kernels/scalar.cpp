#include <bit>

#include "boltssi/kernels.hpp"

namespace boltssi::kernels::scalar {

std::uint64_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
  std::uint64_t total = 0;
  for (std::size_t w = 0; w < words; ++w) total += std::popcount(a[w] & b[w]);
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
  PairMoments m;
  for (std::size_t r = 0; r < n; ++r) {
    const double w = a[r] * b[r];
    m.w += w;
    m.aw += a[r] * w;
    m.bw += b[r] * w;
    m.ww += w * w;
    m.wy += w * y[r];
  }
  return m;
}

}  // namespace boltssi::kernels::scalar

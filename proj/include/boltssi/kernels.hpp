#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation and, where the build and CPU allow it, an AVX2 variant.
// The variant is picked once at startup; BOLTSSI_KERNEL=scalar forces the
// reference path.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace boltssi::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

// True when this binary carries the variant and the CPU can run it.
bool isa_available(Isa isa) noexcept;
std::vector<Isa> available_isas();

// Variant used by the dispatched entry points below.
Isa active_isa() noexcept;
// Overrides the dispatch choice; throws if the ISA is unavailable.
void set_active_isa(Isa isa);

// Pair-specific sums for the Gaussian marginal fit of columns a and b with
// w = a*b: sum(w), sum(a*w), sum(b*w), sum(w*w), sum(w*y).
struct PairMoments {
  double w = 0.0;
  double aw = 0.0;
  double bw = 0.0;
  double ww = 0.0;
  double wy = 0.0;
};

// Function table for one ISA.
struct KernelSet {
  // popcount(a AND b) over `words` words.
  std::uint64_t (*and_popcount)(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t words);
  // For levels ra < rows_a and rb < rows_b of two row blocks (row r starts at
  // block + r * stride), out[ra * rows_b + rb] = popcount of the AND of the
  // two rows over words [begin, begin + words).
  void (*cross_counts)(const std::uint64_t* block_a, unsigned rows_a,
                       const std::uint64_t* block_b, unsigned rows_b, std::size_t stride,
                       std::size_t begin, std::size_t words, std::uint32_t* out);
  PairMoments (*pair_moments)(const double* a, const double* b, const double* y,
                              std::size_t n);
};

const KernelSet& kernel_set(Isa isa);

namespace scalar {
std::uint64_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t words);
void cross_counts(const std::uint64_t* block_a, unsigned rows_a, const std::uint64_t* block_b,
                  unsigned rows_b, std::size_t stride, std::size_t begin, std::size_t words,
                  std::uint32_t* out);
PairMoments pair_moments(const double* a, const double* b, const double* y, std::size_t n);
}  // namespace scalar

#if defined(BOLTSSI_HAVE_AVX2)
namespace avx2 {
std::uint64_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t words);
void cross_counts(const std::uint64_t* block_a, unsigned rows_a, const std::uint64_t* block_b,
                  unsigned rows_b, std::size_t stride, std::size_t begin, std::size_t words,
                  std::uint32_t* out);
PairMoments pair_moments(const double* a, const double* b, const double* y, std::size_t n);
}  // namespace avx2
#endif

// Dispatched entry points.
inline std::uint64_t and_popcount(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b) {
  return kernel_set(active_isa()).and_popcount(a.data(), b.data(), std::min(a.size(), b.size()));
}

inline PairMoments pair_moments(std::span<const double> a, std::span<const double> b,
                                std::span<const double> y) {
  return kernel_set(active_isa()).pair_moments(a.data(), b.data(), y.data(), y.size());
}

}  // namespace boltssi::kernels

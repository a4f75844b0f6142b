#include "boltssi/pairs.hpp"

#include "boltssi/error.hpp"

namespace boltssi {

PairIndex pair_at(std::uint64_t index, std::uint64_t p) {
  if (index >= pair_count(p)) {
    throw Error(ErrorKind::IndexOutOfRange, "pair index out of range");
  }
  // Largest row i whose first linear index does not exceed `index`.
  std::uint64_t lo = 0;
  std::uint64_t hi = p - 2;
  while (lo < hi) {
    const std::uint64_t mid = (lo + hi + 1) / 2;
    if (linear_index(PairIndex{static_cast<std::uint32_t>(mid),
                               static_cast<std::uint32_t>(mid + 1)},
                     p) <= index) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  const std::uint64_t row_start =
      linear_index(PairIndex{static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(lo + 1)}, p);
  return PairIndex{static_cast<std::uint32_t>(lo),
                   static_cast<std::uint32_t>(lo + 1 + (index - row_start))};
}

PairRange::PairRange(std::uint32_t p) : p_(p) {
  if (p < 2) throw Error(ErrorKind::DimensionTooSmall, "pair enumeration needs p >= 2");
}

}  // namespace boltssi

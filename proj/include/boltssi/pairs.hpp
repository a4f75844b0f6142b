#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iterator>

namespace boltssi {

// Canonical unordered pair of column indices, i < j.
struct PairIndex {
  std::uint32_t i = 0;
  std::uint32_t j = 1;

  friend auto operator<=>(const PairIndex&, const PairIndex&) = default;
};

constexpr std::uint64_t pair_count(std::uint64_t p) noexcept {
  return p < 2 ? 0 : p * (p - 1) / 2;
}

// Position of (i, j) in the lexicographic enumeration of all pairs.
constexpr std::uint64_t linear_index(PairIndex pair, std::uint64_t p) noexcept {
  const std::uint64_t i = pair.i;
  return i * (2 * p - i - 1) / 2 + (pair.j - i - 1);
}

// Inverse of linear_index.
PairIndex pair_at(std::uint64_t index, std::uint64_t p);

// Lexicographic stream of all p(p-1)/2 pairs.
class PairRange {
 public:
  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = PairIndex;
    using difference_type = std::ptrdiff_t;
    using pointer = const PairIndex*;
    using reference = const PairIndex&;

    iterator() = default;
    iterator(PairIndex at, std::uint32_t p) : at_(at), p_(p) {}

    reference operator*() const noexcept { return at_; }
    pointer operator->() const noexcept { return &at_; }

    iterator& operator++() noexcept {
      if (++at_.j == p_) {
        ++at_.i;
        at_.j = at_.i + 1;
      }
      return *this;
    }
    iterator operator++(int) noexcept {
      iterator old = *this;
      ++*this;
      return old;
    }

    friend bool operator==(const iterator& a, const iterator& b) noexcept {
      return a.at_ == b.at_;
    }

   private:
    PairIndex at_{};
    std::uint32_t p_ = 0;
  };

  // Throws ErrorKind::DimensionTooSmall when p < 2.
  explicit PairRange(std::uint32_t p);

  iterator begin() const noexcept { return {PairIndex{0, 1}, p_}; }
  iterator end() const noexcept { return {PairIndex{p_ - 1, p_}, p_}; }
  std::uint64_t size() const noexcept { return pair_count(p_); }

 private:
  std::uint32_t p_;
};

inline PairRange pair_iterator(std::uint32_t p) { return PairRange(p); }

}  // namespace boltssi

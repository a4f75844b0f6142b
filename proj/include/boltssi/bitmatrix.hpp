#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "boltssi/discretize.hpp"

namespace boltssi {

// Packed Boolean representation of a DiscreteMatrix.
//
// Samples are regrouped by response class (stable within a class). For each
// variable k and level a there is one row of `row_words()` words; class c
// occupies words [stratum_begin(c), stratum_begin(c) + stratum_words(c)) of
// that row. Bit t of a stratum segment is the t-th sample of that class
// (little-endian within a word); padding bits are zero. The rows of one
// variable are contiguous so a pair touches two blocks.
class BitMatrix {
 public:
  static constexpr std::size_t kWordBits = 64;

  explicit BitMatrix(const DiscreteMatrix& dm);

  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return arities_.size(); }
  unsigned classes() const noexcept { return static_cast<unsigned>(strata_sizes_.size()); }
  unsigned arity(std::size_t k) const { return arities_.at(k); }
  bool degenerate(std::size_t k) const { return arity(k) < 2; }

  std::size_t stratum_size(unsigned c) const { return strata_sizes_.at(c); }
  std::size_t stratum_begin(unsigned c) const { return stratum_offsets_.at(c); }
  std::size_t stratum_words(unsigned c) const {
    return (stratum_size(c) + kWordBits - 1) / kWordBits;
  }
  std::size_t row_words() const noexcept { return row_words_; }

  // First word of variable k's block (arity(k) rows of row_words() words).
  const std::uint64_t* block(std::size_t k) const { return words_.data() + block_offsets_.at(k); }

  // Bits of (variable k, level a, class c); throws IndexOutOfRange.
  std::span<const std::uint64_t> row(std::size_t k, unsigned a, unsigned c) const;

  // #{samples : code_i = a, code_j = b, class = c}; throws IndexOutOfRange.
  std::uint64_t joint_count(std::size_t i, unsigned a, std::size_t j, unsigned b,
                            unsigned c) const;

  // Row rendered as '0'/'1' characters, first sample of the stratum first.
  std::string bit_string(std::size_t k, unsigned a, unsigned c) const;

  // Original sample index of the t-th sample in class c.
  std::size_t sample_at(unsigned c, std::size_t t) const;

  std::size_t stored_bits() const noexcept { return words_.size() * kWordBits; }

 private:
  std::vector<std::uint64_t> words_;
  std::vector<std::size_t> block_offsets_;
  std::vector<std::uint8_t> arities_;
  std::vector<std::size_t> strata_sizes_;
  std::vector<std::size_t> stratum_offsets_;
  std::vector<std::vector<std::size_t>> strata_members_;
  std::size_t row_words_ = 0;
  std::size_t n_ = 0;
};

}  // namespace boltssi

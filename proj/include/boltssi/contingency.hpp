#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "boltssi/bitmatrix.hpp"
#include "boltssi/discretize.hpp"
#include "boltssi/pairs.hpp"

namespace boltssi {

inline constexpr std::size_t kMaxCells = kMaxArity * kMaxArity * kMaxClasses;

// Dense I x J x K table of counts (levels of X_i x levels of X_j x response
// classes) with every one- and two-way margin cached. Cell (a, b, c) lives at
// index (a * J + b) * K + c.
class ContingencyTable3 {
 public:
  ContingencyTable3() = default;
  // Copies `counts` (I*J*K entries) and computes the margins.
  ContingencyTable3(unsigned rows, unsigned cols, unsigned classes,
                    std::span<const std::uint32_t> counts, PairIndex pair = {});

  unsigned rows() const noexcept { return rows_; }
  unsigned cols() const noexcept { return cols_; }
  unsigned classes() const noexcept { return classes_; }
  std::size_t cells() const noexcept { return std::size_t{rows_} * cols_ * classes_; }
  PairIndex pair() const noexcept { return pair_; }

  std::uint32_t count(unsigned a, unsigned b, unsigned c) const noexcept {
    return n_[(a * cols_ + b) * classes_ + c];
  }
  std::span<const std::uint32_t> counts() const noexcept { return {n_.data(), cells()}; }

  std::uint32_t margin_ij(unsigned a, unsigned b) const noexcept { return ij_[a * cols_ + b]; }
  std::uint32_t margin_ik(unsigned a, unsigned c) const noexcept { return ik_[a * classes_ + c]; }
  std::uint32_t margin_jk(unsigned b, unsigned c) const noexcept { return jk_[b * classes_ + c]; }
  std::uint32_t margin_i(unsigned a) const noexcept { return i_[a]; }
  std::uint32_t margin_j(unsigned b) const noexcept { return j_[b]; }
  std::uint32_t margin_k(unsigned c) const noexcept { return k_[c]; }
  std::uint64_t total() const noexcept { return total_; }

  // Number of levels with a nonzero one-way margin on each axis.
  unsigned effective_rows() const noexcept;
  unsigned effective_cols() const noexcept;
  unsigned effective_classes() const noexcept;
  // (I-1)(J-1)(K-1) over the effective arities.
  unsigned degrees_of_freedom() const noexcept;

  // Same table with the two predictor axes swapped.
  ContingencyTable3 transposed() const;

 private:
  friend void build_table_into(const BitMatrix&, PairIndex, ContingencyTable3&);
  void reset_shape(unsigned rows, unsigned cols, unsigned classes, PairIndex pair);
  void compute_margins() noexcept;

  std::array<std::uint32_t, kMaxCells> n_{};
  std::array<std::uint32_t, kMaxArity * kMaxArity> ij_{};
  std::array<std::uint32_t, kMaxArity * kMaxClasses> ik_{};
  std::array<std::uint32_t, kMaxArity * kMaxClasses> jk_{};
  std::array<std::uint32_t, kMaxArity> i_{};
  std::array<std::uint32_t, kMaxArity> j_{};
  std::array<std::uint32_t, kMaxClasses> k_{};
  std::uint64_t total_ = 0;
  unsigned rows_ = 0;
  unsigned cols_ = 0;
  unsigned classes_ = 0;
  PairIndex pair_{};
};

// Throws ErrorKind::DegeneratePair when either variable has arity < 2 and
// ErrorKind::IndexOutOfRange for a bad pair.
ContingencyTable3 build_table(const BitMatrix& bm, PairIndex pair);

// Allocation-free variant used by the sweep; `out` is overwritten.
void build_table_into(const BitMatrix& bm, PairIndex pair, ContingencyTable3& out);

}  // namespace boltssi

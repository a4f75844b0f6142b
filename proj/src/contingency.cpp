#include "boltssi/contingency.hpp"

#include <algorithm>

#include "boltssi/error.hpp"
#include "boltssi/kernels.hpp"

namespace boltssi {

ContingencyTable3::ContingencyTable3(unsigned rows, unsigned cols, unsigned classes,
                                     std::span<const std::uint32_t> counts, PairIndex pair) {
  reset_shape(rows, cols, classes, pair);
  if (counts.size() != cells()) {
    throw Error(ErrorKind::DimensionTooSmall, "count vector does not match table shape");
  }
  std::copy(counts.begin(), counts.end(), n_.begin());
  compute_margins();
}

void ContingencyTable3::reset_shape(unsigned rows, unsigned cols, unsigned classes,
                                    PairIndex pair) {
  if (rows < 1 || rows > kMaxArity || cols < 1 || cols > kMaxArity || classes < 1 ||
      classes > kMaxClasses) {
    throw Error(ErrorKind::InvalidConfig, "table shape outside 16 x 16 x 2");
  }
  rows_ = rows;
  cols_ = cols;
  classes_ = classes;
  pair_ = pair;
}

void ContingencyTable3::compute_margins() noexcept {
  std::fill_n(ij_.begin(), rows_ * cols_, 0u);
  std::fill_n(ik_.begin(), rows_ * classes_, 0u);
  std::fill_n(jk_.begin(), cols_ * classes_, 0u);
  std::fill_n(i_.begin(), rows_, 0u);
  std::fill_n(j_.begin(), cols_, 0u);
  std::fill_n(k_.begin(), classes_, 0u);
  total_ = 0;
  for (unsigned a = 0; a < rows_; ++a) {
    for (unsigned b = 0; b < cols_; ++b) {
      for (unsigned c = 0; c < classes_; ++c) {
        const std::uint32_t v = count(a, b, c);
        ij_[a * cols_ + b] += v;
        ik_[a * classes_ + c] += v;
        jk_[b * classes_ + c] += v;
        i_[a] += v;
        j_[b] += v;
        k_[c] += v;
        total_ += v;
      }
    }
  }
}

unsigned ContingencyTable3::effective_rows() const noexcept {
  return static_cast<unsigned>(std::count_if(i_.begin(), i_.begin() + rows_, [](auto v) { return v > 0; }));
}

unsigned ContingencyTable3::effective_cols() const noexcept {
  return static_cast<unsigned>(std::count_if(j_.begin(), j_.begin() + cols_, [](auto v) { return v > 0; }));
}

unsigned ContingencyTable3::effective_classes() const noexcept {
  return static_cast<unsigned>(std::count_if(k_.begin(), k_.begin() + classes_, [](auto v) { return v > 0; }));
}

unsigned ContingencyTable3::degrees_of_freedom() const noexcept {
  const unsigned i = effective_rows();
  const unsigned j = effective_cols();
  const unsigned k = effective_classes();
  if (i < 2 || j < 2 || k < 2) return 0;
  return (i - 1) * (j - 1) * (k - 1);
}

ContingencyTable3 ContingencyTable3::transposed() const {
  ContingencyTable3 t;
  t.reset_shape(cols_, rows_, classes_, PairIndex{pair_.j, pair_.i});
  for (unsigned a = 0; a < rows_; ++a) {
    for (unsigned b = 0; b < cols_; ++b) {
      for (unsigned c = 0; c < classes_; ++c) t.n_[(b * rows_ + a) * classes_ + c] = count(a, b, c);
    }
  }
  t.compute_margins();
  return t;
}

void build_table_into(const BitMatrix& bm, PairIndex pair, ContingencyTable3& out) {
  if (pair.i >= bm.p() || pair.j >= bm.p()) {
    throw Error(ErrorKind::IndexOutOfRange, "pair index out of range");
  }
  const unsigned rows = bm.arity(pair.i);
  const unsigned cols = bm.arity(pair.j);
  if (rows < 2 || cols < 2) {
    throw Error(ErrorKind::DegeneratePair, "pair involves a column collapsed to one level");
  }
  const unsigned classes = bm.classes();
  out.reset_shape(rows, cols, classes, pair);

  const auto& kernel = kernels::kernel_set(kernels::active_isa());
  std::array<std::uint32_t, kMaxArity * kMaxArity> slice{};
  for (unsigned c = 0; c < classes; ++c) {
    kernel.cross_counts(bm.block(pair.i), rows, bm.block(pair.j), cols, bm.row_words(),
                        bm.stratum_begin(c), bm.stratum_words(c), slice.data());
    for (unsigned ab = 0; ab < rows * cols; ++ab) out.n_[ab * classes + c] = slice[ab];
  }
  out.compute_margins();
}

ContingencyTable3 build_table(const BitMatrix& bm, PairIndex pair) {
  ContingencyTable3 t;
  build_table_into(bm, pair, t);
  return t;
}

}  // namespace boltssi

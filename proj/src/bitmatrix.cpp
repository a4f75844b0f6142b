#include "boltssi/bitmatrix.hpp"

#include "boltssi/error.hpp"
#include "boltssi/kernels.hpp"

namespace boltssi {

BitMatrix::BitMatrix(const DiscreteMatrix& dm) : arities_(dm.arities()), n_(dm.n()) {
  const unsigned m = dm.response_arity();
  strata_sizes_.assign(m, 0);
  strata_members_.assign(m, {});
  const auto response = dm.response_codes();
  for (std::size_t r = 0; r < n_; ++r) strata_members_[response[r]].push_back(r);

  stratum_offsets_.resize(m);
  std::size_t offset = 0;
  for (unsigned c = 0; c < m; ++c) {
    strata_sizes_[c] = strata_members_[c].size();
    stratum_offsets_[c] = offset;
    offset += stratum_words(c);
  }
  row_words_ = offset;

  block_offsets_.resize(p());
  std::size_t total_rows = 0;
  for (std::size_t k = 0; k < p(); ++k) {
    block_offsets_[k] = total_rows * row_words_;
    total_rows += arities_[k];
  }
  words_.assign(total_rows * row_words_, 0);

  for (std::size_t k = 0; k < p(); ++k) {
    const auto codes = dm.column(k);
    std::uint64_t* base = words_.data() + block_offsets_[k];
    for (unsigned c = 0; c < m; ++c) {
      const auto& members = strata_members_[c];
      for (std::size_t t = 0; t < members.size(); ++t) {
        std::uint64_t* row = base + codes[members[t]] * row_words_ + stratum_offsets_[c];
        row[t / kWordBits] |= std::uint64_t{1} << (t % kWordBits);
      }
    }
  }
}

std::span<const std::uint64_t> BitMatrix::row(std::size_t k, unsigned a, unsigned c) const {
  if (k >= p() || a >= arities_[k] || c >= classes()) {
    throw Error(ErrorKind::IndexOutOfRange, "bit row index out of range");
  }
  return {block(k) + a * row_words_ + stratum_offsets_[c], stratum_words(c)};
}

std::uint64_t BitMatrix::joint_count(std::size_t i, unsigned a, std::size_t j, unsigned b,
                                     unsigned c) const {
  return kernels::and_popcount(row(i, a, c), row(j, b, c));
}

std::string BitMatrix::bit_string(std::size_t k, unsigned a, unsigned c) const {
  const auto bits = row(k, a, c);
  std::string out(stratum_size(c), '0');
  for (std::size_t t = 0; t < out.size(); ++t) {
    if ((bits[t / kWordBits] >> (t % kWordBits)) & 1u) out[t] = '1';
  }
  return out;
}

std::size_t BitMatrix::sample_at(unsigned c, std::size_t t) const {
  if (c >= classes() || t >= strata_members_[c].size()) {
    throw Error(ErrorKind::IndexOutOfRange, "stratum sample index out of range");
  }
  return strata_members_[c][t];
}

}  // namespace boltssi

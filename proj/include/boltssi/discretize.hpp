#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "boltssi/dataset.hpp"

namespace boltssi {

inline constexpr unsigned kMaxArity = 16;
inline constexpr unsigned kMaxClasses = 2;

struct DiscretizationSpec {
  unsigned predictor_arity = 3;
  // Optional per-column override; empty means predictor_arity everywhere.
  std::vector<unsigned> column_arity;

  unsigned arity_for(std::size_t column) const {
    return column_arity.empty() ? predictor_arity : column_arity.at(column);
  }
};

// Level codes for every predictor plus the response classes.
//
// Codes are column-major. Every level of every column is occupied; a column
// whose cutpoints all coincide ends up with arity 1 and is reported as
// degenerate (it cannot take part in a pair table).
class DiscreteMatrix {
 public:
  // Validates codes against arities; every level and class must be nonempty.
  DiscreteMatrix(std::vector<std::uint8_t> codes, std::size_t n, std::size_t p,
                 std::vector<std::uint8_t> arities, std::vector<std::uint8_t> response_codes,
                 unsigned response_arity);

  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return p_; }
  unsigned arity(std::size_t k) const { return arities_.at(k); }
  const std::vector<std::uint8_t>& arities() const noexcept { return arities_; }
  bool degenerate(std::size_t k) const { return arity(k) < 2; }
  unsigned response_arity() const noexcept { return response_arity_; }

  std::span<const std::uint8_t> column(std::size_t k) const;
  std::span<const std::uint8_t> response_codes() const noexcept { return response_; }
  std::uint8_t code(std::size_t row, std::size_t k) const { return column(k)[row]; }

 private:
  std::vector<std::uint8_t> codes_;
  std::vector<std::uint8_t> arities_;
  std::vector<std::uint8_t> response_;
  std::size_t n_;
  std::size_t p_;
  unsigned response_arity_;
};

struct BinnedColumn {
  std::vector<std::uint8_t> codes;
  unsigned arity = 0;
};

// Equal-frequency binning. Cutpoints are the order statistics at ranks
// ceil(n*k/arity), k = 1..arity-1; a value goes to level k when
// c_k < x <= c_{k+1}. Coinciding cutpoints and empty levels are merged.
BinnedColumn quantile_bin(std::span<const double> values, unsigned arity);

// Y > median(Y) -> 1, else 0. The median of an even-length sample is the
// midpoint of the two central order statistics.
std::vector<std::uint8_t> median_split(std::span<const double> values);

// Throws ErrorKind::DegenerateColumn when the response has a single class,
// ErrorKind::InvalidConfig for an arity outside [2, 16].
DiscreteMatrix discretize(const Dataset& ds, const DiscretizationSpec& spec);

}  // namespace boltssi

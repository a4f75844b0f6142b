#include "boltssi/discretize.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "boltssi/error.hpp"

namespace boltssi {

DiscreteMatrix::DiscreteMatrix(std::vector<std::uint8_t> codes, std::size_t n, std::size_t p,
                               std::vector<std::uint8_t> arities,
                               std::vector<std::uint8_t> response_codes, unsigned response_arity)
    : codes_(std::move(codes)),
      arities_(std::move(arities)),
      response_(std::move(response_codes)),
      n_(n),
      p_(p),
      response_arity_(response_arity) {
  if (codes_.size() != n_ * p_ || arities_.size() != p_ || response_.size() != n_) {
    throw Error(ErrorKind::DimensionTooSmall, "discrete matrix storage does not match n x p");
  }
  if (response_arity_ < 1 || response_arity_ > kMaxClasses) {
    throw Error(ErrorKind::InvalidConfig, "response arity must be 1 or 2");
  }
  std::array<std::size_t, kMaxArity> seen{};
  for (std::size_t k = 0; k < p_; ++k) {
    const unsigned arity = arities_[k];
    if (arity < 1 || arity > kMaxArity) {
      throw Error(ErrorKind::InvalidConfig, "column arity must lie in [1, 16]");
    }
    seen.fill(0);
    for (std::size_t r = 0; r < n_; ++r) {
      const std::uint8_t c = codes_[k * n_ + r];
      if (c >= arity) {
        throw Error(ErrorKind::IndexOutOfRange,
                    "code " + std::to_string(c) + " exceeds arity in column " + std::to_string(k));
      }
      ++seen[c];
    }
    for (unsigned a = 0; a < arity; ++a) {
      if (seen[a] == 0) {
        throw Error(ErrorKind::DegenerateColumn,
                    "level " + std::to_string(a) + " of column " + std::to_string(k) + " is empty");
      }
    }
  }
  seen.fill(0);
  for (std::uint8_t c : response_) {
    if (c >= response_arity_) throw Error(ErrorKind::IndexOutOfRange, "response code exceeds arity");
    ++seen[c];
  }
  for (unsigned c = 0; c < response_arity_; ++c) {
    if (seen[c] == 0) throw Error(ErrorKind::DegenerateColumn, "empty response class");
  }
}

std::span<const std::uint8_t> DiscreteMatrix::column(std::size_t k) const {
  if (k >= p_) throw Error(ErrorKind::IndexOutOfRange, "column index out of range");
  return {codes_.data() + k * n_, n_};
}

BinnedColumn quantile_bin(std::span<const double> values, unsigned arity) {
  if (arity < 2 || arity > kMaxArity) {
    throw Error(ErrorKind::InvalidConfig, "arity must lie in [2, 16]");
  }
  const std::size_t n = values.size();
  BinnedColumn out;
  out.codes.assign(n, 0);
  if (n == 0) return out;

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> cuts;
  cuts.reserve(arity - 1);
  for (unsigned k = 1; k < arity; ++k) {
    const std::size_t rank = (n * k + arity - 1) / arity;  // 1-indexed ceil(n k / l)
    cuts.push_back(sorted[std::max<std::size_t>(rank, 1) - 1]);
  }
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::array<std::size_t, kMaxArity> count{};
  for (std::size_t r = 0; r < n; ++r) {
    const auto level = static_cast<std::uint8_t>(
        std::lower_bound(cuts.begin(), cuts.end(), values[r]) - cuts.begin());
    out.codes[r] = level;
    ++count[level];
  }

  // Collapse empty levels so that codes stay dense.
  std::array<std::uint8_t, kMaxArity> remap{};
  unsigned used = 0;
  for (unsigned a = 0; a <= cuts.size(); ++a) {
    if (count[a] > 0) remap[a] = static_cast<std::uint8_t>(used++);
  }
  if (used != cuts.size() + 1) {
    for (auto& c : out.codes) c = remap[c];
  }
  out.arity = used;
  return out;
}

std::vector<std::uint8_t> median_split(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n == 0) return {};
  const double median =
      n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  std::vector<std::uint8_t> codes(n);
  for (std::size_t r = 0; r < n; ++r) codes[r] = values[r] > median ? 1 : 0;
  return codes;
}

DiscreteMatrix discretize(const Dataset& ds, const DiscretizationSpec& spec) {
  const std::size_t n = ds.n();
  const std::size_t p = ds.p();
  if (!spec.column_arity.empty() && spec.column_arity.size() != p) {
    throw Error(ErrorKind::InvalidConfig, "per-column arity list does not match p");
  }

  std::vector<std::uint8_t> codes(n * p);
  std::vector<std::uint8_t> arities(p);
  for (std::size_t k = 0; k < p; ++k) {
    BinnedColumn binned = quantile_bin(ds.column(k), spec.arity_for(k));
    std::copy(binned.codes.begin(), binned.codes.end(), codes.begin() + static_cast<std::ptrdiff_t>(k * n));
    arities[k] = static_cast<std::uint8_t>(binned.arity);
  }

  std::vector<std::uint8_t> response(n);
  if (ds.family() == Family::Binomial) {
    for (std::size_t r = 0; r < n; ++r) response[r] = ds.response()[r] > 0.5 ? 1 : 0;
  } else {
    response = median_split(ds.response());
  }
  const bool has0 = std::find(response.begin(), response.end(), 0) != response.end();
  const bool has1 = std::find(response.begin(), response.end(), 1) != response.end();
  if (!(has0 && has1)) {
    throw Error(ErrorKind::DegenerateColumn, "response has a single class after discretization");
  }
  return DiscreteMatrix(std::move(codes), n, p, std::move(arities), std::move(response), 2);
}

}  // namespace boltssi

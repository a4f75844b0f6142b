#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace boltssi {

enum class Family { Gaussian, Binomial };

const char* to_string(Family family) noexcept;
Family parse_family(const std::string& text);

// Dense n x p covariate matrix (column-major) plus a response vector.
// Immutable after construction; the constructor enforces the invariants
// (n >= 4, p >= 2, finite values, binary response under Binomial, and
// zero-mean/unit-sd columns when flagged as standardized).
class Dataset {
 public:
  Dataset(std::vector<double> x_column_major, std::size_t n, std::size_t p,
          std::vector<double> y, Family family,
          std::vector<std::string> column_names = {},
          bool standardized = false);

  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return p_; }
  Family family() const noexcept { return family_; }
  bool standardized() const noexcept { return standardized_; }

  std::span<const double> column(std::size_t k) const;
  std::span<const double> response() const noexcept { return y_; }
  const std::vector<std::string>& column_names() const noexcept { return names_; }
  std::span<const double> values() const noexcept { return x_; }

  // Z-scores every covariate column with the (n-1) standard deviation.
  // Throws ErrorKind::ConstantColumn on a zero-variance column.
  Dataset standardize() const;

  // Gaussian only: z-score the response as well.
  Dataset standardize_response() const;

  // Row subset, preserving column order and names.
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<std::string> names_;
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  Family family_ = Family::Gaussian;
  bool standardized_ = false;
};

// In-place z-score with the n-1 denominator. Returns false (and leaves the
// data untouched) when the column has zero variance.
bool zscore(std::span<double> values);

enum class HeaderMode { Auto, Present, Absent };

using ResponseColumn = std::variant<std::string, std::size_t>;

struct LoadOptions {
  ResponseColumn response = std::size_t{0};
  Family family = Family::Gaussian;
  char delimiter = ',';
  bool standardize = true;
  bool standardize_response = false;
  HeaderMode header = HeaderMode::Auto;
};

Dataset load_delimited(const std::filesystem::path& path, const LoadOptions& options);
Dataset parse_delimited(const std::string& text, const LoadOptions& options);

}  // namespace boltssi

#include "boltssi/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "boltssi/error.hpp"

namespace boltssi {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Io: return "Io";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::ConstantColumn: return "ConstantColumn";
    case ErrorKind::BadResponse: return "BadResponse";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::DegenerateColumn: return "DegenerateColumn";
    case ErrorKind::DegeneratePair: return "DegeneratePair";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::Collinear: return "Collinear";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

const char* to_string(Family family) noexcept {
  return family == Family::Gaussian ? "gaussian" : "binomial";
}

Family parse_family(const std::string& text) {
  if (text == "gaussian" || text == "linear") return Family::Gaussian;
  if (text == "binomial" || text == "logistic") return Family::Binomial;
  throw Error(ErrorKind::InvalidConfig, "unknown family '" + text + "'");
}

namespace {

struct ColumnMoments {
  double mean;
  double sd;
};

ColumnMoments moments(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

bool is_constant(const ColumnMoments& m) {
  return !(m.sd > 1e-12 * std::max(1.0, std::abs(m.mean)));
}

}  // namespace

bool zscore(std::span<double> values) {
  if (values.size() < 2) return false;
  const ColumnMoments m = moments(values);
  if (is_constant(m)) return false;
  for (double& x : values) x = (x - m.mean) / m.sd;
  return true;
}

Dataset::Dataset(std::vector<double> x_column_major, std::size_t n, std::size_t p,
                 std::vector<double> y, Family family,
                 std::vector<std::string> column_names, bool standardized)
    : x_(std::move(x_column_major)),
      y_(std::move(y)),
      names_(std::move(column_names)),
      n_(n),
      p_(p),
      family_(family),
      standardized_(standardized) {
  if (n_ < 4 || p_ < 2) {
    throw Error(ErrorKind::DimensionTooSmall,
                "dataset needs n >= 4 and p >= 2 (got n=" + std::to_string(n_) +
                    ", p=" + std::to_string(p_) + ")");
  }
  if (x_.size() != n_ * p_ || y_.size() != n_) {
    throw Error(ErrorKind::DimensionTooSmall, "dataset storage does not match n x p");
  }
  if (names_.empty()) {
    names_.reserve(p_);
    for (std::size_t k = 0; k < p_; ++k) names_.push_back("V" + std::to_string(k + 1));
  } else if (names_.size() != p_) {
    throw Error(ErrorKind::DimensionTooSmall, "column name count does not match p");
  }
  for (double v : x_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Parse, "non-finite covariate value");
  }
  for (double v : y_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::BadResponse, "non-finite response value");
    if (family_ == Family::Binomial && v != 0.0 && v != 1.0) {
      throw Error(ErrorKind::BadResponse,
                  "binomial response must be 0/1, found " + std::to_string(v));
    }
  }
  if (standardized_) {
    for (std::size_t k = 0; k < p_; ++k) {
      const ColumnMoments m = moments(column(k));
      if (std::abs(m.mean) > 1e-9 || std::abs(m.sd - 1.0) > 1e-9) {
        throw Error(ErrorKind::InvalidConfig,
                    "column '" + names_[k] + "' is flagged standardized but is not");
      }
    }
  }
}

std::span<const double> Dataset::column(std::size_t k) const {
  if (k >= p_) throw Error(ErrorKind::IndexOutOfRange, "column index out of range");
  return {x_.data() + k * n_, n_};
}

Dataset Dataset::standardize() const {
  std::vector<double> x = x_;
  for (std::size_t k = 0; k < p_; ++k) {
    if (!zscore(std::span<double>(x.data() + k * n_, n_))) {
      throw Error(ErrorKind::ConstantColumn, "constant column '" + names_[k] + "'");
    }
  }
  return Dataset(std::move(x), n_, p_, y_, family_, names_, true);
}

Dataset Dataset::standardize_response() const {
  if (family_ != Family::Gaussian) {
    throw Error(ErrorKind::InvalidConfig, "only a Gaussian response can be standardized");
  }
  std::vector<double> y = y_;
  if (!zscore(y)) throw Error(ErrorKind::BadResponse, "constant response");
  return Dataset(x_, n_, p_, std::move(y), family_, names_, standardized_);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<double> x(rows.size() * p_);
  std::vector<double> y(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= n_) throw Error(ErrorKind::IndexOutOfRange, "row index out of range");
    y[r] = y_[rows[r]];
    for (std::size_t k = 0; k < p_; ++k) x[k * rows.size() + r] = x_[k * n_ + rows[r]];
  }
  return Dataset(std::move(x), rows.size(), p_, std::move(y), family_, names_, false);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

bool parse_number(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

}  // namespace

Dataset parse_delimited(const std::string& text, const LoadOptions& options) {
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::size_t> line_numbers;
  {
    std::string_view rest(text);
    std::size_t line_no = 0;
    while (!rest.empty()) {
      const std::size_t nl = rest.find('\n');
      std::string_view line = rest.substr(0, nl);
      rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
      ++line_no;
      if (trim(line).empty()) continue;
      rows.push_back(split(line, options.delimiter));
      line_numbers.push_back(line_no);
    }
  }
  if (rows.empty()) throw Error(ErrorKind::DimensionTooSmall, "empty input");

  bool has_header = options.header == HeaderMode::Present;
  if (options.header == HeaderMode::Auto) {
    double dummy;
    has_header = std::any_of(rows.front().begin(), rows.front().end(),
                             [&](std::string_view c) { return !parse_number(c, dummy); });
  }

  const std::size_t width = rows.front().size();
  std::vector<std::string> names;
  if (has_header) {
    for (auto c : rows.front()) names.emplace_back(c);
  } else {
    for (std::size_t k = 0; k < width; ++k) names.push_back("V" + std::to_string(k + 1));
  }

  std::size_t response = 0;
  if (const auto* name = std::get_if<std::string>(&options.response)) {
    const auto it = std::find(names.begin(), names.end(), *name);
    if (it == names.end()) {
      throw Error(ErrorKind::BadResponse, "response column '" + *name + "' not found");
    }
    response = static_cast<std::size_t>(it - names.begin());
  } else {
    response = std::get<std::size_t>(options.response);
    if (response >= width) {
      throw Error(ErrorKind::BadResponse,
                  "response column index " + std::to_string(response) + " out of range");
    }
  }

  const std::size_t first = has_header ? 1 : 0;
  const std::size_t n = rows.size() - first;
  const std::size_t p = width - 1;
  if (n < 4 || p < 2) {
    throw Error(ErrorKind::DimensionTooSmall,
                "need at least 4 rows and 2 predictors (got n=" + std::to_string(n) +
                    ", p=" + std::to_string(p) + ")");
  }

  std::vector<double> x(n * p);
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& cells = rows[first + r];
    const std::size_t line_no = line_numbers[first + r];
    if (cells.size() != width) {
      throw Error(ErrorKind::Parse, "row " + std::to_string(line_no) + ": expected " +
                                        std::to_string(width) + " fields, found " +
                                        std::to_string(cells.size()));
    }
    std::size_t out_col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      double value = 0.0;
      if (!parse_number(cells[c], value)) {
        throw Error(ErrorKind::Parse, "row " + std::to_string(line_no) + ", column " +
                                          std::to_string(c + 1) + ": cannot parse '" +
                                          std::string(cells[c]) + "' as a number");
      }
      if (c == response) {
        if (options.family == Family::Binomial && value != 0.0 && value != 1.0) {
          throw Error(ErrorKind::BadResponse, "row " + std::to_string(line_no) +
                                                  ": binomial response must be 0 or 1");
        }
        y[r] = value;
      } else {
        x[out_col++ * n + r] = value;
      }
    }
  }
  names.erase(names.begin() + static_cast<std::ptrdiff_t>(response));

  Dataset ds(std::move(x), n, p, std::move(y), options.family, std::move(names));
  if (options.standardize) ds = ds.standardize();
  if (options.standardize_response) ds = ds.standardize_response();
  return ds;
}

Dataset load_delimited(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_delimited(buf.str(), options);
}

}  // namespace boltssi

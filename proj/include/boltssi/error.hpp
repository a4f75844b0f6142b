#pragma once

#include <stdexcept>
#include <string>

namespace boltssi {

enum class ErrorKind {
  Io,
  Parse,
  ConstantColumn,
  BadResponse,
  DimensionTooSmall,
  DegenerateColumn,
  DegeneratePair,
  IndexOutOfRange,
  Collinear,
  NotConverged,
  Domain,
  InvalidConfig,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace boltssi

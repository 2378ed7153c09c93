#pragma once

#include <stdexcept>
#include <string>

namespace pcraft {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised by steady-state queries on chains without a unique stationary
/// distribution; transient or cumulative queries still apply.
class NotErgodic : public Error {
 public:
  using Error::Error;
};

/// Malformed textual input. Row and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
      : Error(format(what, row, column)), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t row, std::size_t column) {
    std::string out;
    if (row != 0) {
      out += "row " + std::to_string(row);
      if (column != 0) out += ", column " + std::to_string(column);
      out += ": ";
    }
    return out + what;
  }

  std::size_t row_;
  std::size_t column_;
};

}  // namespace pcraft

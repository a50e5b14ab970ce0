#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pseudosense {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Unknown word, sense, pair or index.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied argument outside the documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a failed factorization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pseudosense

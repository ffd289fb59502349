#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mscan {

// Base of every error the library raises on bad input or an infeasible
// configuration. Anything else escaping the library is an internal error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

class DegenerateSupport : public Error {
 public:
  using Error::Error;
};

class InvalidTruncation : public Error {
 public:
  using Error::Error;
};

// ĉ_n = vol / t_n^{d_X} too small for the extreme-value normalisation.
class TruncationTooCoarse : public Error {
 public:
  using Error::Error;
};

class RefinedUnavailable : public Error {
 public:
  using Error::Error;
};

class InvalidCovariance : public Error {
 public:
  using Error::Error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mscan

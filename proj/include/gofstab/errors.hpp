#pragma once

#include <stdexcept>
#include <string>

namespace gof {

// Every failure surfaced by the library derives from Error so callers can
// catch one type; the subclasses let the CLI map failures to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function (x <= 0 for a
// survival function, u outside [0,1], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A stabilizing form evaluated outside the (n, p, alpha) range it was fitted on.
class ValidityError : public Error {
 public:
  using Error::Error;
};

// Inconsistent numeric input: non-monotone quantile grids, non-positive
// quantiles, degenerate observations.
class DataError : public Error {
 public:
  using Error::Error;
};

class TableMissError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SingularFitError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. line is 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gof

#pragma once

#include <stdexcept>
#include <string>

namespace hsdma {

/// Matrix dimensions of a realization or an interconnection do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar argument is outside its documented domain (h <= 0, tau < 0,
/// omega beyond Nyquist, odd sample count, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures that come from the numbers rather than from the caller.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// sE - A (or zI - Ad) is numerically singular at the requested point.
class SingularError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Loewner reduction found no rank at all.
class RankCollapseError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Loewner reduction kept every singular value: the data do not determine a
/// lower-order model and the grid needs more points.
class UnderSampledError : public NumericalError {
 public:
  UnderSampledError(std::size_t order, std::size_t points)
      : NumericalError("under-sampled: reduced order " + std::to_string(order) +
                       " equals the " + std::to_string(points) +
                       " interpolation points per side; increase N"),
        order_(order) {}
  std::size_t order() const noexcept { return order_; }

 private:
  std::size_t order_;
};

/// The stability predicate does not bracket a boundary, or flips more than once.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed JSON/CSV input. `where` carries the line or field.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what) {}
};

}  // namespace hsdma

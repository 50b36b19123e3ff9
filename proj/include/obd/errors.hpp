#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace obd {

/// Input outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Eigensolver, quadrature or sampler failed to produce a trustworthy number.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checked invariant of a computed result did not hold.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Real value that may be +infinity or undefined, carried as an explicit tag
/// so that divergent variances never leak into reports as inf/NaN.
class ExtendedReal {
 public:
  enum class Kind { Finite, Infinite, Undefined };

  static ExtendedReal finite(double v);
  static ExtendedReal infinity() { return ExtendedReal(Kind::Infinite, 0.0); }
  static ExtendedReal undefined() { return ExtendedReal(Kind::Undefined, 0.0); }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }
  bool is_infinite() const { return kind_ == Kind::Infinite; }
  bool is_undefined() const { return kind_ == Kind::Undefined; }

  /// Throws DomainError unless finite.
  double value() const;
  double value_or(double fallback) const { return is_finite() ? value_ : fallback; }

  /// "inf", "undefined" or the shortest round-trip decimal.
  std::string to_string() const;

  friend bool operator==(const ExtendedReal&, const ExtendedReal&) = default;

 private:
  ExtendedReal(Kind k, double v) : kind_(k), value_(v) {}
  Kind kind_;
  double value_;
};

std::ostream& operator<<(std::ostream& os, const ExtendedReal& v);

}  // namespace obd

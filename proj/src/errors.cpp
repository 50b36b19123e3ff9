#include "obd/errors.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace obd {

ExtendedReal ExtendedReal::finite(double v) {
  if (std::isnan(v)) return undefined();
  if (std::isinf(v)) return infinity();
  return ExtendedReal(Kind::Finite, v);
}

double ExtendedReal::value() const {
  if (kind_ != Kind::Finite) throw DomainError("value is " + to_string());
  return value_;
}

std::string ExtendedReal::to_string() const {
  switch (kind_) {
    case Kind::Infinite:
      return "inf";
    case Kind::Undefined:
      return "undefined";
    case Kind::Finite:
      break;
  }
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << value_;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const ExtendedReal& v) { return os << v.to_string(); }

}  // namespace obd

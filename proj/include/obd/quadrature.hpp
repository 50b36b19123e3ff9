#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstddef>
#include <string>

#include "obd/errors.hpp"

namespace obd {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

/// Adaptive Gauss-Kronrod (G15/K31) on `panels` equal sub-intervals of [a, b].
/// Oscillatory integrands should get about one panel per period so that the
/// first Kronrod estimate already resolves the oscillation.
template <class F>
QuadratureResult integrate_panels(F&& f, double a, double b, std::size_t panels, double rel_tol,
                                  unsigned max_depth = 20) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  QuadratureResult total;
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t i = 0; i < panels; ++i) {
    const double lo = a + h * static_cast<double>(i);
    const double hi = (i + 1 == panels) ? b : lo + h;
    double err = 0.0;
    double l1 = 0.0;
    total.value += Rule::integrate(f, lo, hi, max_depth, rel_tol, &err, &l1);
    total.error += err;
    total.l1 += l1;
  }
  if (!std::isfinite(total.value) || total.error > 10.0 * rel_tol * total.l1 + 1e-300) {
    throw NumericalFailure("quadrature did not converge: error estimate " + std::to_string(total.error) +
                           " for L1 norm " + std::to_string(total.l1));
  }
  return total;
}

}  // namespace obd

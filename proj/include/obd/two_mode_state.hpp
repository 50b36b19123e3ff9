#pragma once

#include <complex>
#include <span>
#include <vector>

#include "obd/errors.hpp"

namespace obd {

using Complex = std::complex<double>;
using Amplitudes = std::vector<Complex>;

/// Pure N-boson state over two modes in the Fock basis. Amplitude j belongs
/// to |j, N-j>: j particles in mode a, N-j in mode b.
class TwoModeState {
 public:
  /// Validates length N+1 and unit norm (to 1e-12).
  TwoModeState(int n_particles, Amplitudes amplitudes);

  /// Rescales arbitrary nonzero amplitudes to unit norm.
  static TwoModeState normalized(int n_particles, Amplitudes amplitudes);

  int n_particles() const { return n_; }
  std::span<const Complex> amplitudes() const { return amps_; }
  double norm2() const;

 private:
  int n_;
  Amplitudes amps_;
};

/// First and second moments of the Schwinger operators
/// Jx = (a^+ b + b^+ a)/2, Jy = (a^+ b - b^+ a)/(2i), Jz = (n_a - n_b)/2.
struct AngularMoments {
  double jx = 0.0;
  double jy = 0.0;
  double jz = 0.0;
  double jx2 = 0.0;
  double jy2 = 0.0;
  double jz2 = 0.0;
  // Symmetrized cross moments <{Jx, Jy}>/2 and <{Jx, Jz}>/2.
  double jxy = 0.0;
  double jxz = 0.0;

  double var_x() const { return jx2 - jx * jx; }
  double var_y() const { return jy2 - jy * jy; }
  double var_z() const { return jz2 - jz * jz; }
};

struct SqueezingSummary {
  ExtendedReal xi_n = ExtendedReal::undefined();
  ExtendedReal xi_phi = ExtendedReal::undefined();
  double visibility = 0.0;
  double qfi = 0.0;
};

/// Lowest eigenvector of H = -Jx + chi Jz^2. Largest-magnitude amplitude is
/// made real positive.
TwoModeState ground_state(int n_particles, double chi);

/// Gaussian number-squeezed envelope exp(-(j-N/2)^2 / (N xi)) turned into a
/// phase-squeezed state by the beam splitter exp(-i pi/2 Jx). To leading order
/// in 1/N the resulting state has xi_phi^2 = xi.
TwoModeState gaussian_phase_squeezed(int n_particles, double xi);

/// Exact finite sums; second moments are computed as ||J psi||^2.
AngularMoments moments(const TwoModeState& state);

SqueezingSummary summarize(const AngularMoments& m, int n_particles);

/// exp(-i angle Jx) |psi>, through the eigendecomposition of Jx.
TwoModeState rotate_about_x(const TwoModeState& state, double angle);

/// chi at which xi_phi of the ground state is smallest. Between this point and
/// chi = 0 the map chi -> xi_phi is monotone (phase-squeezing branch); beyond
/// it the visibility collapses and xi_phi grows again.
double phase_squeezing_turning_point(int n_particles);

/// Ground-state chi on the phase-squeezing branch with the requested xi_phi,
/// by bisection to 1e-6 in xi_phi. DomainError if the branch cannot reach it.
double chi_for_phase_squeezing(int n_particles, double xi_phi);

}  // namespace obd

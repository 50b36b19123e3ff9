#pragma once

#include <array>
#include <variant>

#include "obd/two_mode_state.hpp"

namespace obd {

/// Far-field expansion geometry. Internally lengths are measured in units of
/// 1/kappa, so the default packet has kappa = 1 and only the dimensionless
/// product kappa * envelope_width matters.
struct WavePacket {
  double x0 = 0.5;              // half-separation of the initial wells
  double sigma_tilde = 1.0;     // sqrt(hbar t / mu)
  double kappa = 1.0;           // fringe wavenumber 2 x0 / sigma_tilde^2
  double envelope_width = 60.0;  // std. dev. of the Gaussian |psi~|^2

  static constexpr double kDefaultFringeProduct = 60.0;
  static constexpr double kMinFringeProduct = 40.0;
  static constexpr double kDomainWidths = 8.0;

  /// kappa = 1, envelope_width = kappa_width.
  static WavePacket dimensionless(double kappa_width = kDefaultFringeProduct);
  /// kappa = 2 x0 / sigma_tilde^2 with the envelope given in the same units.
  static WavePacket from_geometry(double x0, double sigma_tilde, double envelope_width);

  /// DomainError for non-positive lengths or too few fringes under the envelope.
  void validate() const;
  /// Sampling and integration run over +-kDomainWidths envelope widths.
  double domain_half_width() const { return kDomainWidths * envelope_width; }
  double fringe_period() const;
};

/// Normalized Gaussian envelope |psi~(x / sigma~^2)|^2.
double envelope_density(double x, const WavePacket& wp);

/// One- and two-body densities of the interference pattern after a phase
/// imprint theta and free expansion. An optional Gaussian detector blur of
/// std. dev. blur_sigma is folded in exactly: it widens the envelope, scales
/// the fringe wavenumber by w^2/W^2 and damps the fringe contrast.
class PatternDensity {
 public:
  PatternDensity(const AngularMoments& moments, int n_particles, const WavePacket& wp, double theta,
                 double blur_sigma = 0.0);

  double p1(double x) const;
  double dp1_dtheta(double x) const;
  /// Two-body density, evaluated in the literal cos(kappa (x1 - x2)) form.
  double p2(double x1, double x2) const;

  double envelope(double x) const;
  /// kappa x + theta after blur rescaling.
  double fringe_phase(double x) const { return fringe_wavenumber_ * x + theta_; }

  PatternDensity with_theta(double theta) const;

  double theta() const { return theta_; }
  int n_particles() const { return n_; }
  const AngularMoments& moments() const { return moments_; }
  const WavePacket& wavepacket() const { return wp_; }
  double blur_sigma() const { return blur_; }
  /// Bare visibility 2<Jx>/N.
  double bare_visibility() const { return bare_visibility_; }
  /// Fringe contrast seen in p1 (bare visibility times blur damping).
  double visibility() const { return bare_visibility_ * damping_; }
  double damping() const { return damping_; }
  double fringe_wavenumber() const { return fringe_wavenumber_; }
  double envelope_sd() const { return envelope_sd_; }

  /// p2 = g(x1) g(x2) [1 + v (c1 + c2) + cc c1 c2 + ss s1 s2] with
  /// c = cos(fringe_phase), s = sin(fringe_phase).
  struct Separable {
    double visibility;
    double cc;
    double ss;
  };
  Separable separable() const;

 private:
  AngularMoments moments_;
  int n_;
  WavePacket wp_;
  double theta_;
  double blur_;
  double bare_visibility_;
  double damping_;
  double fringe_wavenumber_;
  double envelope_sd_;
};

double p1_pattern(double x, const PatternDensity& model);
double p2_pattern(double x1, double x2, const PatternDensity& model);

/// Separated-arm Mach-Zehnder output. The two point-like arms are discrete
/// outcomes: index 0 is arm a, index 1 is arm b.
struct MziDensities {
  double theta = 0.0;
  int n_particles = 0;
  std::array<double, 2> p1{};
  std::array<double, 2> dp1_dtheta{};
  std::array<std::array<double, 2>, 2> p2{};
};

MziDensities mzi_densities(double theta, const AngularMoments& moments, int n_particles);

using DensityModel = std::variant<PatternDensity, MziDensities>;

}  // namespace obd

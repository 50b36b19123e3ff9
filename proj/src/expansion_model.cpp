#include "obd/expansion_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace obd {

namespace {

double gaussian(double x, double sd) {
  const double z = x / sd;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sd);
}

}  // namespace

WavePacket WavePacket::dimensionless(double kappa_width) {
  WavePacket wp;
  wp.x0 = 0.5;
  wp.sigma_tilde = 1.0;
  wp.kappa = 1.0;
  wp.envelope_width = kappa_width;
  wp.validate();
  return wp;
}

WavePacket WavePacket::from_geometry(double x0, double sigma_tilde, double envelope_width) {
  WavePacket wp;
  wp.x0 = x0;
  wp.sigma_tilde = sigma_tilde;
  wp.kappa = 2.0 * x0 / (sigma_tilde * sigma_tilde);
  wp.envelope_width = envelope_width;
  wp.validate();
  return wp;
}

void WavePacket::validate() const {
  if (!(x0 > 0.0) || !(sigma_tilde > 0.0) || !(kappa > 0.0) || !(envelope_width > 0.0)) {
    throw DomainError("wave-packet lengths must be positive");
  }
  if (kappa * envelope_width < kMinFringeProduct) {
    throw DomainError("kappa * envelope_width = " + std::to_string(kappa * envelope_width) +
                      " is below the many-fringe threshold " + std::to_string(kMinFringeProduct));
  }
}

double WavePacket::fringe_period() const { return 2.0 * std::numbers::pi / kappa; }

double envelope_density(double x, const WavePacket& wp) { return gaussian(x, wp.envelope_width); }

PatternDensity::PatternDensity(const AngularMoments& moments, int n_particles, const WavePacket& wp, double theta,
                               double blur_sigma)
    : moments_(moments), n_(n_particles), wp_(wp), theta_(theta), blur_(blur_sigma) {
  if (n_particles < 1) throw DomainError("particle number must be positive");
  if (!(blur_sigma >= 0.0) || !std::isfinite(blur_sigma)) throw DomainError("blur sigma must be >= 0");
  wp_.validate();
  // The pattern densities below hold for states with a real Jx-Jy coherence.
  const double tol = 1e-9 * n_particles * n_particles;
  if (std::abs(moments.jy) > 1e-9 * n_particles || std::abs(moments.jxy) > tol) {
    throw DomainError("pattern densities need <Jy> = 0 and <{Jx, Jy}> = 0");
  }
  bare_visibility_ = 2.0 * moments.jx / n_particles;
  const double w2 = wp.envelope_width * wp.envelope_width;
  const double big_w2 = w2 + blur_sigma * blur_sigma;
  envelope_sd_ = std::sqrt(big_w2);
  fringe_wavenumber_ = wp.kappa * w2 / big_w2;
  damping_ = std::exp(-0.5 * wp.kappa * wp.kappa * blur_sigma * blur_sigma * w2 / big_w2);
}

PatternDensity PatternDensity::with_theta(double theta) const {
  PatternDensity copy = *this;
  copy.theta_ = theta;
  return copy;
}

double PatternDensity::envelope(double x) const { return gaussian(x, envelope_sd_); }

double PatternDensity::p1(double x) const {
  return envelope(x) * (1.0 + visibility() * std::cos(fringe_phase(x)));
}

double PatternDensity::dp1_dtheta(double x) const {
  return -envelope(x) * visibility() * std::sin(fringe_phase(x));
}

double PatternDensity::p2(double x1, double x2) const {
  if (n_ < 2) throw DomainError("two-body density needs at least 2 particles");
  const double nm1 = n_ - 1.0;
  const double d2 = damping_ * damping_;
  const double phi1 = fringe_phase(x1);
  const double phi2 = fringe_phase(x2);
  const double a = 4.0 * moments_.jx2 / (n_ * nm1);
  const double b = 4.0 * moments_.jy2 / (n_ * nm1);
  const double bracket = 1.0 - d2 * std::cos(fringe_wavenumber_ * (x1 - x2)) / nm1 +
                         visibility() * (std::cos(phi1) + std::cos(phi2)) +
                         d2 * a * (std::cos(phi1) * std::cos(phi2)) + d2 * b * (std::sin(phi1) * std::sin(phi2));
  return envelope(x1) * envelope(x2) * bracket;
}

PatternDensity::Separable PatternDensity::separable() const {
  if (n_ < 2) throw DomainError("two-body density needs at least 2 particles");
  const double nm1 = n_ - 1.0;
  const double d2 = damping_ * damping_;
  const double a = 4.0 * moments_.jx2 / (n_ * nm1);
  const double b = 4.0 * moments_.jy2 / (n_ * nm1);
  return {visibility(), d2 * (a - 1.0 / nm1), d2 * (b - 1.0 / nm1)};
}

double p1_pattern(double x, const PatternDensity& model) { return model.p1(x); }

double p2_pattern(double x1, double x2, const PatternDensity& model) { return model.p2(x1, x2); }

MziDensities mzi_densities(double theta, const AngularMoments& m, int n_particles) {
  if (n_particles < 1) throw DomainError("particle number must be positive");
  const double n = n_particles;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  // Output imbalance Jz' = Jz cos(theta) - Jx sin(theta); n_a = N/2 + Jz'.
  const double jz_out = m.jz * c - m.jx * s;
  const double jz_out2 = m.jz2 * c * c + m.jx2 * s * s - 2.0 * s * c * m.jxz;
  const double djz_out = -m.jz * s - m.jx * c;

  MziDensities d;
  d.theta = theta;
  d.n_particles = n_particles;
  d.p1 = {0.5 + jz_out / n, 0.5 - jz_out / n};
  d.dp1_dtheta = {djz_out / n, -djz_out / n};
  if (n_particles >= 2) {
    const double pairs = n * (n - 1.0);
    d.p2[0][0] = (0.25 * n * n + (n - 1.0) * jz_out + jz_out2 - 0.5 * n) / pairs;
    d.p2[1][1] = (0.25 * n * n - (n - 1.0) * jz_out + jz_out2 - 0.5 * n) / pairs;
    d.p2[0][1] = (0.25 * n * n - jz_out2) / pairs;
    d.p2[1][0] = d.p2[0][1];
  }
  return d;
}

}  // namespace obd

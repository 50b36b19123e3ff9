#include "obd/two_mode_state.hpp"

#include <lapacke.h>

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <numbers>
#include <string>

namespace obd {

namespace {

// sqrt((j+1)(N-j)): matrix element of a^+ b between |j> and |j+1>.
std::vector<double> ladder_elements(int n) {
  std::vector<double> e(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    e[static_cast<std::size_t>(j)] = std::sqrt(static_cast<double>(j + 1) * static_cast<double>(n - j));
  }
  return e;
}

void require_particles(int n) {
  if (n < 2) throw DomainError("two-mode state needs at least 2 particles, got " + std::to_string(n));
}

// J+ = a^+ b raises j, J- lowers it.
Amplitudes raise(std::span<const Complex> psi, const std::vector<double>& ladder) {
  Amplitudes out(psi.size(), Complex{});
  for (std::size_t j = 0; j + 1 < psi.size(); ++j) out[j + 1] = ladder[j] * psi[j];
  return out;
}

Amplitudes lower(std::span<const Complex> psi, const std::vector<double>& ladder) {
  Amplitudes out(psi.size(), Complex{});
  for (std::size_t j = 0; j + 1 < psi.size(); ++j) out[j] = ladder[j] * psi[j + 1];
  return out;
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  Complex s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm2_of(std::span<const Complex> a) {
  double s = 0.0;
  for (const auto& v : a) s += std::norm(v);
  return s;
}

void fix_global_phase(Amplitudes& amps) {
  auto it = std::max_element(amps.begin(), amps.end(),
                             [](const Complex& l, const Complex& r) { return std::abs(l) < std::abs(r); });
  if (it == amps.end() || std::abs(*it) == 0.0) return;
  const Complex phase = std::abs(*it) / *it;
  for (auto& a : amps) a *= phase;
  *it = Complex(std::abs(*it), 0.0);
}

double xi_phi_of_ground_state(int n, double chi) {
  const auto s = summarize(moments(ground_state(n, chi)), n);
  return s.xi_phi.value_or(1e300);
}

}  // namespace

TwoModeState::TwoModeState(int n_particles, Amplitudes amplitudes) : n_(n_particles), amps_(std::move(amplitudes)) {
  if (n_ < 1) throw DomainError("particle number must be positive");
  if (amps_.size() != static_cast<std::size_t>(n_) + 1) {
    throw DomainError("expected " + std::to_string(n_ + 1) + " amplitudes, got " + std::to_string(amps_.size()));
  }
  for (const auto& a : amps_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw DomainError("non-finite amplitude");
  }
  if (std::abs(norm2() - 1.0) > 1e-12) throw DomainError("amplitudes are not normalized");
}

TwoModeState TwoModeState::normalized(int n_particles, Amplitudes amplitudes) {
  const double n2 = norm2_of(amplitudes);
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw DomainError("cannot normalize a zero or non-finite vector");
  const double s = 1.0 / std::sqrt(n2);
  for (auto& a : amplitudes) a *= s;
  return TwoModeState(n_particles, std::move(amplitudes));
}

double TwoModeState::norm2() const { return norm2_of(amps_); }

TwoModeState ground_state(int n_particles, double chi) {
  require_particles(n_particles);
  if (!std::isfinite(chi)) throw DomainError("chi must be finite");
  const int dim = n_particles + 1;
  const double half = 0.5 * n_particles;
  std::vector<double> diag(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim; ++j) diag[static_cast<std::size_t>(j)] = chi * (j - half) * (j - half);
  std::vector<double> off = ladder_elements(n_particles);
  for (auto& e : off) e *= -0.5;

  lapack_int found = 0;
  std::vector<double> eigenvalues(static_cast<std::size_t>(dim));  // dstevx writes up to dim entries
  std::vector<double> vec(static_cast<std::size_t>(dim));
  std::vector<lapack_int> ifail(static_cast<std::size_t>(dim));
  const lapack_int info = LAPACKE_dstevx(LAPACK_COL_MAJOR, 'V', 'I', dim, diag.data(), off.data(), 0.0, 0.0, 1, 1,
                                         2.0 * LAPACKE_dlamch('S'), &found, eigenvalues.data(), vec.data(), dim, ifail.data());
  if (info != 0 || found != 1) {
    throw NumericalFailure("ground-state eigensolve did not converge (info=" + std::to_string(info) + ")");
  }
  // The ground state is positive and even under j -> N - j; near the cat
  // regime the solver can mix in the almost degenerate odd partner.
  Amplitudes amps(vec.begin(), vec.end());
  fix_global_phase(amps);
  for (std::size_t j = 0, k = amps.size() - 1; j < k; ++j, --k) amps[j] = amps[k] = 0.5 * (amps[j] + amps[k]);
  return TwoModeState::normalized(n_particles, std::move(amps));
}

TwoModeState rotate_about_x(const TwoModeState& state, double angle) {
  const int n = state.n_particles();
  const int dim = n + 1;
  std::vector<double> eig(static_cast<std::size_t>(dim), 0.0);
  std::vector<double> off = ladder_elements(n);
  for (auto& e : off) e *= 0.5;
  std::vector<double> z(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim));
  const lapack_int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', dim, eig.data(), off.data(), z.data(), dim);
  if (info != 0) throw NumericalFailure("Jx eigendecomposition failed (info=" + std::to_string(info) + ")");

  const auto psi = state.amplitudes();
  const auto udim = static_cast<std::size_t>(dim);
  // psi' = V diag(exp(-i angle lambda)) V^T psi
  Amplitudes proj(udim, Complex{});
  for (std::size_t k = 0; k < udim; ++k) {
    Complex s{};
    for (std::size_t i = 0; i < udim; ++i) s += z[i + k * udim] * psi[i];
    proj[k] = s * std::polar(1.0, -angle * eig[k]);
  }
  Amplitudes out(udim, Complex{});
  for (std::size_t k = 0; k < udim; ++k) {
    for (std::size_t i = 0; i < udim; ++i) out[i] += z[i + k * udim] * proj[k];
  }
  return TwoModeState::normalized(n, std::move(out));
}

TwoModeState gaussian_phase_squeezed(int n_particles, double xi) {
  require_particles(n_particles);
  if (!(xi > 0.0) || xi > 1.0 || !std::isfinite(xi)) {
    throw DomainError("Gaussian squeezing parameter must lie in (0, 1], got " + std::to_string(xi));
  }
  const double half = 0.5 * n_particles;
  Amplitudes amps(static_cast<std::size_t>(n_particles) + 1);
  for (int j = 0; j <= n_particles; ++j) {
    amps[static_cast<std::size_t>(j)] = std::exp(-(j - half) * (j - half) / (n_particles * xi));
  }
  auto number_squeezed = TwoModeState::normalized(n_particles, std::move(amps));
  return rotate_about_x(number_squeezed, std::numbers::pi / 2.0);
}

AngularMoments moments(const TwoModeState& state) {
  const int n = state.n_particles();
  const auto psi = state.amplitudes();
  const auto ladder = ladder_elements(n);
  const Amplitudes up = raise(psi, ladder);
  const Amplitudes down = lower(psi, ladder);

  Amplitudes jx_psi(psi.size()), jy_psi(psi.size()), jz_psi(psi.size());
  const Complex minus_half_i(0.0, -0.5);
  for (std::size_t j = 0; j < psi.size(); ++j) {
    jx_psi[j] = 0.5 * (up[j] + down[j]);
    jy_psi[j] = minus_half_i * (up[j] - down[j]);
    jz_psi[j] = (static_cast<double>(j) - 0.5 * n) * psi[j];
  }

  AngularMoments m;
  m.jx = inner(psi, jx_psi).real();
  m.jy = inner(psi, jy_psi).real();
  m.jz = inner(psi, jz_psi).real();
  m.jx2 = norm2_of(jx_psi);
  m.jy2 = norm2_of(jy_psi);
  m.jz2 = norm2_of(jz_psi);
  m.jxy = inner(jx_psi, jy_psi).real();
  m.jxz = inner(jx_psi, jz_psi).real();
  return m;
}

SqueezingSummary summarize(const AngularMoments& m, int n_particles) {
  SqueezingSummary s;
  s.visibility = 2.0 * m.jx / n_particles;
  s.qfi = 4.0 * std::max(0.0, m.var_z());
  if (std::abs(m.jx) <= 1e-12 * n_particles) return s;
  s.xi_n = ExtendedReal::finite(std::sqrt(n_particles * std::max(0.0, m.var_z())) / std::abs(m.jx));
  s.xi_phi = ExtendedReal::finite(std::sqrt(n_particles * std::max(0.0, m.var_y())) / std::abs(m.jx));
  return s;
}

double phase_squeezing_turning_point(int n_particles) {
  require_particles(n_particles);
  // The squeezing transition sits near chi*N = -1; scan well past it.
  constexpr int kSteps = 150;
  const double lo = -3.0 / n_particles;
  std::size_t best = 0;
  double best_xi = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kSteps; ++i) {
    const double chi = lo * (1.0 - static_cast<double>(i) / kSteps);
    const double xi = xi_phi_of_ground_state(n_particles, chi);
    if (xi < best_xi) {
      best_xi = xi;
      best = static_cast<std::size_t>(i);
    }
  }
  if (best == 0) throw NumericalFailure("phase-squeezing minimum not bracketed");
  const double step = -lo / kSteps;
  const double a = lo + step * (static_cast<double>(best) - 1.0);
  const double b = std::min(0.0, lo + step * (static_cast<double>(best) + 1.0));
  const auto r = boost::math::tools::brent_find_minima(
      [n_particles](double chi) { return xi_phi_of_ground_state(n_particles, chi); }, a, b, 40);
  return r.first;
}

double chi_for_phase_squeezing(int n_particles, double xi_phi) {
  require_particles(n_particles);
  constexpr double kTol = 1e-6;
  if (std::abs(xi_phi - 1.0) <= kTol) return 0.0;
  const double turn = phase_squeezing_turning_point(n_particles);
  const double xi_min = xi_phi_of_ground_state(n_particles, turn);
  if (!(xi_phi > xi_min) || xi_phi > 1.0) {
    throw DomainError("xi_phi=" + std::to_string(xi_phi) + " is outside the ground-state branch (" +
                      std::to_string(xi_min) + ", 1]");
  }
  // xi_phi decreases monotonically from 1 at chi=0 to xi_min at the turning point.
  double lo = turn, hi = 0.0;
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = xi_phi_of_ground_state(n_particles, mid) - xi_phi;
    if (std::abs(f) < 0.1 * kTol) break;
    if (f > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  if (std::abs(xi_phi_of_ground_state(n_particles, mid) - xi_phi) > kTol) {
    throw NumericalFailure("bisection for chi did not reach the xi_phi tolerance");
  }
  return mid;
}

}  // namespace obd

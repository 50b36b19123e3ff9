#include "obd/asymptotic_theory.hpp"

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "obd/quadrature.hpp"

namespace obd {

namespace {

constexpr double kQuadratureTol = 1e-10;

struct PatternIntegrals {
  double f1;
  double i0;  // int g s
  double ic;  // int g cos s
  double is;  // int g sin s
};

std::size_t panel_count(const PatternDensity& m, double half) {
  const double period = 2.0 * std::numbers::pi / m.fringe_wavenumber();
  return static_cast<std::size_t>(std::ceil(2.0 * half / period));
}

double score(const PatternDensity& m, double x) {
  const double p = m.p1(x);
  return p > 0.0 ? m.dp1_dtheta(x) / p : 0.0;
}

PatternIntegrals pattern_integrals(const PatternDensity& m, bool with_c) {
  const double half = WavePacket::kDomainWidths * m.envelope_sd();
  const std::size_t panels = panel_count(m, half);
  PatternIntegrals r{};
  r.f1 = integrate_panels(
             [&m](double x) {
               const double p = m.p1(x);
               if (!(p > 0.0)) return 0.0;
               const double d = m.dp1_dtheta(x);
               return d * d / p;
             },
             -half, half, panels, kQuadratureTol)
             .value;
  if (!with_c) return r;
  r.i0 = integrate_panels([&m](double x) { return m.envelope(x) * score(m, x); }, -half, half, panels, kQuadratureTol)
             .value;
  r.ic = integrate_panels(
             [&m](double x) { return m.envelope(x) * std::cos(m.fringe_phase(x)) * score(m, x); }, -half, half,
             panels, kQuadratureTol)
             .value;
  r.is = integrate_panels(
             [&m](double x) { return m.envelope(x) * std::sin(m.fringe_phase(x)) * score(m, x); }, -half, half,
             panels, kQuadratureTol)
             .value;
  return r;
}

double mzi_f1(const MziDensities& d) {
  double f = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    if (d.p1[i] > 0.0) {
      f += d.dp1_dtheta[i] * d.dp1_dtheta[i] / d.p1[i];
    } else if (d.dp1_dtheta[i] != 0.0) {
      throw NumericalFailure("MZI outcome with zero probability but nonzero derivative");
    }
  }
  return f;
}

double mzi_c(const MziDensities& d) {
  if (d.n_particles < 2) return 0.0;
  std::array<double, 2> s{};
  for (std::size_t i = 0; i < 2; ++i) s[i] = d.p1[i] > 0.0 ? d.dp1_dtheta[i] / d.p1[i] : 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) c += d.p2[i][j] * s[i] * s[j];
  }
  return c;
}

void check_bins(std::span<const double> means, std::span<const double> derivs) {
  if (means.size() != derivs.size()) throw DomainError("bin means and derivatives differ in length");
  if (means.size() < 2) throw DomainError("fit variance needs at least two bins");
  for (double mu : means) {
    if (!(mu > 0.0)) throw DomainError("bin means must be positive");
  }
}

double fisher_sum_of(std::span<const double> means, std::span<const double> derivs) {
  double s = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k) s += derivs[k] * derivs[k] / means[k];
  if (!(s > 0.0)) throw DomainError("degenerate bin model: fit information is zero");
  return s;
}

}  // namespace

double fisher_f1(const DensityModel& model) {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PatternDensity>) {
          return pattern_integrals(m, false).f1;
        } else {
          return mzi_f1(m);
        }
      },
      model);
}

double correlation_c(const DensityModel& model) {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PatternDensity>) {
          if (m.n_particles() < 2) return 0.0;
          // Full bare visibility only for the coherent state, where p2 = p1 p1
          // and C = 0; the separable integrals would diverge individually.
          if (m.bare_visibility() >= 1.0 - 1e-12) return 0.0;
          const auto r = pattern_integrals(m, true);
          const auto sep = m.separable();
          return r.i0 * r.i0 + 2.0 * sep.visibility * r.i0 * r.ic + sep.cc * r.ic * r.ic + sep.ss * r.is * r.is;
        } else {
          return mzi_c(m);
        }
      },
      model);
}

VarianceReport variance_mle(int n_particles, double f1, double c) {
  if (!(f1 > 0.0)) throw DomainError("Fisher information F1 must be positive");
  const double n = n_particles;
  VarianceReport r;
  r.f1 = f1;
  r.c = c;
  const double shot = 1.0 / (n * f1);
  const double corr = (n - 1.0) * c / (n * f1 * f1);
  r.breakdown = {{"one_body", shot}, {"two_body_correlation", corr}};
  r.variance_per_shot = ExtendedReal::finite(shot + corr);
  return r;
}

ExtendedReal variance_mzi(const AngularMoments& m, double theta) {
  const double c2 = std::cos(theta) * std::cos(theta);
  const double s2 = std::sin(theta) * std::sin(theta);
  const double denom = m.jx * m.jx * c2;
  if (m.jx == 0.0) return ExtendedReal::undefined();
  if (c2 < 1e-30) return ExtendedReal::infinity();
  return ExtendedReal::finite((m.var_z() * c2 + m.var_x() * s2) / denom);
}

VarianceReport variance_pattern(int n_particles, double xi_phi, double visibility) {
  if (visibility > 1.0 + 1e-12 || visibility < 0.0) throw DomainError("visibility must lie in [0, 1]");
  VarianceReport r;
  if (visibility <= 0.0) {
    r.variance_per_shot = ExtendedReal::infinity();
    return r;
  }
  const double n = n_particles;
  const double nu2 = visibility * visibility;
  const double root = std::sqrt(std::max(0.0, 1.0 - nu2));
  const double squeezing = xi_phi * xi_phi / n;
  const double contrast = root / (nu2 * n);
  r.f1 = 1.0 - root;
  r.breakdown = {{"squeezing", squeezing}, {"visibility", contrast}};
  r.variance_per_shot = ExtendedReal::finite(squeezing + contrast);
  if (n_particles >= 2) r.c = ((squeezing + contrast) * n * r.f1 - 1.0) * r.f1 / (n - 1.0);
  return r;
}

VarianceReport variance_pattern_noisy(int n_particles, double xi_phi, double visibility, double eta,
                                      double sigma_blur, double kappa) {
  if (!(eta > 0.0) || eta > 1.0) throw DomainError("efficiency eta must lie in (0, 1]");
  if (!(sigma_blur >= 0.0)) throw DomainError("resolution sigma must be >= 0");
  if (visibility > 1.0 + 1e-12 || visibility < 0.0) throw DomainError("visibility must lie in [0, 1]");
  VarianceReport r;
  if (eta * n_particles < 10.0) r.warnings.push_back("eta*N < 10: large-N closed form is unreliable");
  if (visibility <= 0.0) {
    r.variance_per_shot = ExtendedReal::infinity();
    return r;
  }
  const double n = n_particles;
  const double nu2 = visibility * visibility;
  const double k2s2 = kappa * kappa * sigma_blur * sigma_blur;
  const double growth = std::exp(k2s2);
  const double squeezing = xi_phi * xi_phi / n;
  const double noise = ((std::sqrt(std::max(0.0, 1.0 - nu2 / growth)) + 1.0) * growth - eta) / (eta * nu2 * n);
  r.f1 = 1.0 - std::sqrt(std::max(0.0, 1.0 - nu2 / growth));
  r.breakdown = {{"squeezing", squeezing}, {"visibility_and_detection", noise}};
  r.variance_per_shot = ExtendedReal::finite(squeezing + noise);
  return r;
}

double variance_fit(std::span<const double> means, std::span<const double> derivs, const SquareMatrix& sigma) {
  check_bins(means, derivs);
  if (sigma.n != means.size()) throw DomainError("sigma_kl size does not match the bins");
  const double s = fisher_sum_of(means, derivs);
  double scale = 0.0;
  for (std::size_t k = 0; k < sigma.n; ++k) {
    for (std::size_t l = 0; l < sigma.n; ++l) {
      if (k != l) scale = std::max(scale, std::abs(sigma(k, l)));
    }
  }
  double cross = 0.0;
  for (std::size_t k = 0; k < sigma.n; ++k) {
    const double fk = derivs[k] / means[k];
    for (std::size_t l = 0; l < sigma.n; ++l) {
      if (k == l) continue;
      if (std::abs(sigma(k, l) - sigma(l, k)) > 1e-12 * scale) {
        throw DomainError("sigma_kl must be symmetric");
      }
      cross += sigma(k, l) * fk * derivs[l] / means[l];
    }
  }
  return (s + cross) / (s * s);
}

double variance_fit(std::span<const double> means, std::span<const double> derivs, const SeparableKernel& sigma) {
  check_bins(means, derivs);
  const double s = fisher_sum_of(means, derivs);
  double cross = 0.0;
  for (const auto& t : sigma.terms) {
    if (t.u.size() != means.size() || t.v.size() != means.size()) {
      throw DomainError("kernel term size does not match the bins");
    }
    double fu = 0.0, fv = 0.0, diag = 0.0;
    for (std::size_t k = 0; k < means.size(); ++k) {
      const double f = derivs[k] / means[k];
      fu += f * t.u[k];
      fv += f * t.v[k];
      diag += f * f * t.u[k] * t.v[k];
    }
    cross += t.weight * (fu * fv - diag);
  }
  return (s + cross) / (s * s);
}

BinnedFit fit_variance_pattern(const PatternDensity& model, double bin_width) {
  if (!(bin_width > 0.0)) throw DomainError("bin width must be positive");
  const double half = WavePacket::kDomainWidths * model.envelope_sd();
  const auto count = static_cast<std::size_t>(std::llround(2.0 * half / bin_width));
  if (count < 2) throw DomainError("bin width leaves fewer than two bins");
  const double lo = -0.5 * bin_width * static_cast<double>(count);
  const double n = model.n_particles();

  std::vector<double> means, derivs, g, gc, gs;
  means.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double x = lo + (static_cast<double>(k) + 0.5) * bin_width;
    const double mu = bin_width * n * model.p1(x);
    if (!(mu > 1e-300)) continue;
    means.push_back(mu);
    derivs.push_back(bin_width * n * model.dp1_dtheta(x));
    const double env = model.envelope(x);
    g.push_back(env);
    gc.push_back(env * std::cos(model.fringe_phase(x)));
    gs.push_back(env * std::sin(model.fringe_phase(x)));
  }

  SeparableKernel kernel;
  if (model.n_particles() >= 2) {
    // (N-1) p2 - N p1 p1 in separable form, scaled by dx^2 N.
    const auto sep = model.separable();
    const double scale = bin_width * bin_width * n;
    const double v = sep.visibility;
    kernel.terms = {
        {-scale, g, g},
        {-scale * v, gc, g},
        {-scale * v, g, gc},
        {scale * ((n - 1.0) * sep.cc - n * v * v), gc, gc},
        {scale * (n - 1.0) * sep.ss, gs, gs},
    };
  }
  BinnedFit out;
  out.n_bins = means.size();
  out.fisher_sum = fisher_sum_of(means, derivs);
  out.variance_per_shot = variance_fit(means, derivs, kernel);
  return out;
}

double variance_fit_fluorescence(double variance_fit, double alpha, double fisher_sum) {
  if (!(alpha > 0.0)) throw DomainError("fluorescence gain alpha must be positive");
  if (!(fisher_sum > 0.0)) throw DomainError("fit information must be positive");
  if (std::isinf(alpha)) return variance_fit;
  return variance_fit + 1.0 / (alpha * fisher_sum);
}

ExtendedReal fluorescence_threshold(double variance_fit, double fisher_sum, int n_particles) {
  const double snl = 1.0 / n_particles;
  if (variance_fit >= snl) return ExtendedReal::infinity();
  double lo = 1e-8, hi = 1e8;
  // Corrected variance decreases monotonically in alpha.
  for (int it = 0; it < 300 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (variance_fit_fluorescence(variance_fit, mid, fisher_sum) > snl) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return ExtendedReal::finite(hi);
}

double gaussian_scaling_variance(int n_particles, double beta) {
  const double n = n_particles;
  return std::pow(n, -(beta + 1.0)) + std::pow(n, 0.5 * (beta - 3.0));
}

ScalingOptimum gaussian_scaling_optimum(int n_particles) {
  if (n_particles < 2) throw DomainError("scaling optimum needs N >= 2");
  return {1.0 / 3.0, 2.0 * std::pow(static_cast<double>(n_particles), -4.0 / 3.0)};
}

ExtendedReal qfi_bound(const AngularMoments& m) {
  const double v = m.var_z();
  if (!(v > 0.0)) return ExtendedReal::infinity();
  return ExtendedReal::finite(1.0 / (4.0 * v));
}

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("power-law fit needs matching samples, at least 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("power-law fit needs positive samples");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  return {std::exp(intercept), -slope};
}

OptimalState optimize_ground_state(int n_particles, const StateObjective& objective) {
  const double turn = phase_squeezing_turning_point(n_particles);
  auto eval = [&](double chi) {
    const auto m = moments(ground_state(n_particles, chi));
    const auto s = summarize(m, n_particles);
    const double v = objective(m, s);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };
  boost::uintmax_t iters = 200;
  const auto best = boost::math::tools::brent_find_minima(eval, turn, 0.0, 40, iters);
  auto state = ground_state(n_particles, best.first);
  auto m = moments(state);
  auto s = summarize(m, n_particles);
  return {best.first, std::move(state), m, s, best.second};
}

OptimalState optimal_pattern_state(int n_particles) {
  return optimize_ground_state(n_particles, [n_particles](const AngularMoments&, const SqueezingSummary& s) {
    if (!s.xi_phi.is_finite()) return std::numeric_limits<double>::infinity();
    return variance_pattern(n_particles, s.xi_phi.value(), std::clamp(s.visibility, 0.0, 1.0))
        .variance_per_shot.value_or(std::numeric_limits<double>::infinity());
  });
}

OptimalState optimal_noisy_pattern_state(int n_particles, double eta, double sigma_blur, double kappa) {
  return optimize_ground_state(n_particles, [=](const AngularMoments&, const SqueezingSummary& s) {
    if (!s.xi_phi.is_finite()) return std::numeric_limits<double>::infinity();
    return variance_pattern_noisy(n_particles, s.xi_phi.value(), std::clamp(s.visibility, 0.0, 1.0), eta,
                                  sigma_blur, kappa)
        .variance_per_shot.value_or(std::numeric_limits<double>::infinity());
  });
}

}  // namespace obd

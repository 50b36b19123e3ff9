#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "obd/expansion_model.hpp"

namespace obd {

/// Per-shot variance m * Var(theta_hat) with a labeled decomposition.
struct VarianceReport {
  ExtendedReal variance_per_shot = ExtendedReal::undefined();
  double f1 = 0.0;
  double c = 0.0;
  struct Term {
    std::string label;
    double value;
  };
  std::vector<Term> breakdown;
  std::vector<std::string> warnings;
};

/// Fisher information of p1 alone: integral of (d_theta p1)^2 / p1.
double fisher_f1(const DensityModel& model);

/// Two-body correlation term
/// C = int p2(x1,x2) [d_theta p1 / p1](x1) [d_theta p1 / p1](x2).
/// For the pattern the 2D integral is reduced to 1D integrals through the
/// separable form of p2.
double correlation_c(const DensityModel& model);

/// (1/(N F1)) (1 + (N-1) C / F1). DomainError if f1 <= 0.
VarianceReport variance_mle(int n_particles, double f1, double c);

/// Mach-Zehnder error-propagation formula
/// (Var Jz cos^2 + Var Jx sin^2) / (<Jx>^2 cos^2); infinite at cos(theta) = 0.
ExtendedReal variance_mzi(const AngularMoments& m, double theta);

/// Many-fringe closed form (1/N)[xi_phi^2 + sqrt(1 - nu^2)/nu^2].
VarianceReport variance_pattern(int n_particles, double xi_phi, double visibility);

/// Closed form with detection efficiency eta and Gaussian resolution sigma.
VarianceReport variance_pattern_noisy(int n_particles, double xi_phi, double visibility, double eta,
                                      double sigma_blur, double kappa);

/// Symmetric kernel written as a sum of rank-one terms,
/// K(k, l) = sum_r weight_r * u_r(k) * v_r(l).
struct SeparableKernel {
  struct Term {
    double weight;
    std::vector<double> u;
    std::vector<double> v;
  };
  std::vector<Term> terms;
};

/// Dense row-major square matrix.
struct SquareMatrix {
  std::size_t n = 0;
  std::vector<double> data;

  explicit SquareMatrix(std::size_t size) : n(size), data(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
};

/// Binned least-squares variance per shot: the ratio
/// [S + sum_{k != l} sigma_kl^2 f_k f_l] / S^2 with S = sum mu'_k^2 / mu_k and
/// f = mu' / mu. Diagonal entries of sigma are never used.
double variance_fit(std::span<const double> bin_means, std::span<const double> bin_derivs,
                    const SquareMatrix& sigma_kl);
double variance_fit(std::span<const double> bin_means, std::span<const double> bin_derivs,
                    const SeparableKernel& sigma_kl);

struct BinnedFit {
  double variance_per_shot = 0.0;
  double fisher_sum = 0.0;  // sum_k (d_theta <n_k>)^2 / <n_k>
  std::size_t n_bins = 0;
};

/// Fit variance for the pattern with bins of width bin_width over the
/// integration domain. Means are bin_width * N * p1 at the bin centers.
BinnedFit fit_variance_pattern(const PatternDensity& model, double bin_width);

/// Adds (1/alpha)(1/fisher_sum) for fluorescence atom counting.
double variance_fit_fluorescence(double variance_fit, double alpha, double fisher_sum);

/// Smallest alpha for which the fluorescence-corrected fit variance reaches the
/// shot-noise value 1/N, by bisection. Infinite if the clean fit is already at
/// or above shot noise.
ExtendedReal fluorescence_threshold(double variance_fit, double fisher_sum, int n_particles);

struct ScalingOptimum {
  double beta_opt;
  double variance_per_shot;
};

/// Gaussian-state model with xi = N^-beta: N^-(beta+1) + N^((beta-3)/2).
double gaussian_scaling_variance(int n_particles, double beta);
ScalingOptimum gaussian_scaling_optimum(int n_particles);

/// 1 / (4 Var Jz).
ExtendedReal qfi_bound(const AngularMoments& m);

struct PowerLawFit {
  double prefactor;
  double exponent;  // y = prefactor * x^-exponent
};

/// Ordinary least squares on (log x, log y).
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

struct OptimalState {
  double chi;
  TwoModeState state;
  AngularMoments moments;
  SqueezingSummary summary;
  double objective;
};

using StateObjective = std::function<double(const AngularMoments&, const SqueezingSummary&)>;

/// Minimizes the objective over ground states on the phase-squeezing branch.
OptimalState optimize_ground_state(int n_particles, const StateObjective& objective);

/// Ground state minimizing the many-fringe closed form.
OptimalState optimal_pattern_state(int n_particles);

/// Ground state minimizing the noisy closed form.
OptimalState optimal_noisy_pattern_state(int n_particles, double eta, double sigma_blur, double kappa);

}  // namespace obd

#pragma once

#include <functional>
#include <optional>
#include <span>

#include "obd/position_sampler.hpp"

namespace obd {

constexpr std::size_t kScanPoints = 512;
constexpr double kRefineTolerance = 1e-6;

/// Wraps to (-pi, pi].
double wrap_angle(double phi);

struct Estimate {
  double theta_hat = 0.0;
  double log_likelihood = 0.0;
  bool ambiguous = false;
  std::size_t floored = 0;  // data points whose p1 hit the 1e-300 floor
};

/// Grid scan over [lo, hi) followed by Brent refinement around the best scan
/// points. Ambiguous when a second, separated maximum ties the best one.
Estimate maximize_scan(const std::function<double(double)>& objective, double lo, double hi,
                       std::size_t points = kScanPoints);

/// Sum over all positions of log p1(x | phi). Correlations between particles
/// are ignored by construction.
double log_likelihood(std::span<const Shot> shots, double phi, const PatternDensity& model,
                      std::size_t* floored = nullptr);

Estimate mle_estimate(std::span<const Shot> shots, const PatternDensity& model);

/// MZI arm counts. The search is restricted to [-pi/2, pi/2] because p1 only
/// depends on cos and sin of phi through jz cos - jx sin.
double log_likelihood_mzi(std::span<const MziCounts> shots, double phi, const AngularMoments& moments, int n_particles);
Estimate mle_estimate_mzi(std::span<const MziCounts> shots, const AngularMoments& moments, int n_particles);

struct FitEstimate {
  Estimate estimate;
  std::size_t empty_bins = 0;
};

/// Binned fit of the mean counts to dx * n_detected * p1(x_k | phi).
/// Maximizes sum_k nbar_k log mu_k - mu_k, the large-m stationarity condition
/// of the Gaussian likelihood with variance <n_k>/m.
FitEstimate fit_estimate(std::span<const double> mean_counts, const BinSpec& bins, const PatternDensity& model,
                         double n_detected);

}  // namespace obd

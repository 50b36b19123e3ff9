#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "obd/asymptotic_theory.hpp"
#include "obd/detection_noise.hpp"
#include "obd/phase_estimation.hpp"

namespace obd {

enum class Protocol { Pattern, Mzi };
enum class EstimatorKind { Mle, Fit };

struct StateSpec {
  enum class Kind { Chi, XiPhi, Gaussian, Optimal, OptimalNoisy, Coherent };
  Kind kind = Kind::Optimal;
  double value = 0.0;  // chi, target xi_phi or Gaussian parameter; unused otherwise
};

struct CampaignConfig {
  Protocol protocol = Protocol::Pattern;
  EstimatorKind estimator = EstimatorKind::Mle;
  int n_particles = 100;
  int m = 10;
  int n_rep = 500;
  double theta_true = 0.0;
  StateSpec state;
  double kappa_width = WavePacket::kDefaultFringeProduct;
  NoiseSpec noise;
  double bin_width = 0.2;  // units of 1/kappa
  std::uint64_t seed = 1;

  void validate() const;
  WavePacket wavepacket() const { return WavePacket::dimensionless(kappa_width); }
};

struct PreparedState {
  TwoModeState state;
  double chi = 0.0;  // NaN for states not in the ground-state family
  AngularMoments moments;
  SqueezingSummary summary;
};

PreparedState prepare_state(const CampaignConfig& config);

struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;         // theta_true + mean wrapped deviation
  double mean_stderr = 0.0;  // sqrt(variance / count)
  double variance = 0.0;     // sample variance of the wrapped deviation
  double variance_stderr = 0.0;
};

/// Statistics of wrap(estimate - theta_true).
SampleStats deviation_stats(std::span<const double> estimates, double theta_true);

struct CampaignCheck {
  std::string name;
  bool passed;
};

struct CampaignResult {
  CampaignConfig config;
  PreparedState prepared;
  std::vector<double> estimates{};
  std::vector<bool> ambiguous{};
  SampleStats inclusive{};
  SampleStats exclusive{};  // ambiguous repetitions removed
  std::size_t ambiguous_count = 0;
  std::size_t floored_count = 0;
  std::size_t clipped_count = 0;
  std::size_t empty_bin_count = 0;
  ExtendedReal predicted_variance = ExtendedReal::undefined();  // Var(theta_hat) for m shots
  std::string prediction_formula{};
  std::vector<CampaignCheck> checks{};

  bool all_checks_passed() const;
};

/// Theoretical Var(theta_hat) matching the configured protocol, estimator and
/// noise. Undefined where no closed form is available.
ExtendedReal predicted_variance(const CampaignConfig& config, const PreparedState& prepared, std::string* formula);

CampaignResult run_campaign(const CampaignConfig& config);

}  // namespace obd

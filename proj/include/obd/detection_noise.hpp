#pragma once

#include <optional>
#include <span>
#include <vector>

#include "obd/position_sampler.hpp"

namespace obd {

struct NoiseSpec {
  double eta = 1.0;
  double sigma_blur = 0.0;
  std::optional<double> alpha;

  void validate() const;
  bool is_identity() const { return eta == 1.0 && sigma_blur == 0.0 && !alpha; }
};

/// Keeps each position independently with probability eta.
Shot thin(const Shot& shot, double eta, Rng& rng);

/// Adds N(0, sigma^2) jitter to each position.
Shot blur(const Shot& shot, double sigma_blur, Rng& rng);

struct FluorescenceResult {
  std::vector<double> counts;
  std::size_t clipped = 0;
};

/// Adds N(0, nbar_k / (alpha m)) to each mean count, the variance taken from
/// the observed mean. Negative results are clipped to zero and counted.
FluorescenceResult fluorescence(std::span<const double> mean_counts, double alpha, int m, Rng& rng);

/// thin then blur.
Shot apply_position_noise(const Shot& shot, const NoiseSpec& noise, Rng& rng);

}  // namespace obd

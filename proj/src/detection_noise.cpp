#include "obd/detection_noise.hpp"

#include <cmath>

namespace obd {

void NoiseSpec::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("eta must lie in (0, 1]");
  if (!(sigma_blur >= 0.0) || !std::isfinite(sigma_blur)) throw DomainError("sigma_blur must be >= 0");
  if (alpha && !(*alpha > 0.0)) throw DomainError("alpha must be > 0");
}

Shot thin(const Shot& shot, double eta, Rng& rng) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("eta must lie in (0, 1]");
  if (eta == 1.0) return shot;
  Shot out;
  out.theta_true = shot.theta_true;
  out.seed_path = shot.seed_path;
  std::bernoulli_distribution keep(eta);
  for (double x : shot.positions) {
    if (keep(rng)) out.positions.push_back(x);
  }
  return out;
}

Shot blur(const Shot& shot, double sigma_blur, Rng& rng) {
  if (!(sigma_blur >= 0.0)) throw DomainError("sigma_blur must be >= 0");
  if (sigma_blur == 0.0) return shot;
  Shot out = shot;
  std::normal_distribution<double> jitter(0.0, sigma_blur);
  for (double& x : out.positions) x += jitter(rng);
  return out;
}

FluorescenceResult fluorescence(std::span<const double> mean_counts, double alpha, int m, Rng& rng) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
  if (m < 1) throw DomainError("m must be >= 1");
  FluorescenceResult out;
  out.counts.reserve(mean_counts.size());
  std::normal_distribution<double> unit(0.0, 1.0);
  for (double n : mean_counts) {
    double v = n;
    if (n > 0.0) v += std::sqrt(n / (alpha * m)) * unit(rng);
    if (v < 0.0) {
      v = 0.0;
      ++out.clipped;
    }
    out.counts.push_back(v);
  }
  return out;
}

Shot apply_position_noise(const Shot& shot, const NoiseSpec& noise, Rng& rng) {
  return blur(thin(shot, noise.eta, rng), noise.sigma_blur, rng);
}

}  // namespace obd

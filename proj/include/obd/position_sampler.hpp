#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "obd/expansion_model.hpp"

namespace obd {

/// Reproducibility record of one random stream: campaign seed, repetition
/// and the shot (or channel) index inside it.
struct SeedPath {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;
  std::uint64_t index = 0;
};

using Rng = std::mt19937_64;

/// Independent engine per seed path, so results do not depend on scheduling.
Rng make_rng(const SeedPath& path);

/// Fock amplitudes of the particles not yet detected. The state is kept
/// unnormalized by apply_field_operator; log_weight accumulates the log of the
/// norms divided out by the sampler.
struct ReducedState {
  Amplitudes amplitudes;
  int remaining = 0;
  double log_weight = 0.0;

  static ReducedState from(const TwoModeState& state);
  double norm2() const;
};

/// (alpha a + beta b) |phi>.
ReducedState apply_mode_combination(const ReducedState& state, Complex alpha, Complex beta);

/// Far-field field operator at x after the phase imprint:
/// sqrt(g(x)) (e^{i(kx+theta)/2} a + e^{-i(kx+theta)/2} b) |phi>.
ReducedState apply_field_operator(const ReducedState& state, double x, double theta, const WavePacket& wp);

struct Shot {
  std::vector<double> positions;  // units of 1/kappa
  double theta_true = 0.0;
  SeedPath seed_path;
};

/// Exact sequential sampling of all N positions of one shot: each particle is
/// drawn from its conditional density given the earlier detections, and the
/// state is then reduced by the field operator at the drawn position.
///
/// The conditional density of a reduced state is always
/// g(x) (1 + A cos kx + B sin kx), so the sampler keeps cumulative cell masses
/// of g, g cos kx and g sin kx and inverts their linear combination.
class PatternSampler {
 public:
  /// grid_points = 0 picks max(4096, 64 points per fringe), rounded up to a
  /// power of two.
  explicit PatternSampler(const WavePacket& wp, std::size_t grid_points = 0);

  Shot sample(const TwoModeState& state, double theta, Rng& rng, const SeedPath& path = {}) const;

  /// Inverse CDF of g (1 + A cos kx + B sin kx) at probability u in [0, 1),
  /// linear inside each cell.
  double invert(double a_cos, double b_sin, double u) const;

  std::size_t grid_points() const { return grid_.size(); }
  const WavePacket& wavepacket() const { return wp_; }

 private:
  WavePacket wp_;
  std::vector<double> grid_;
  std::vector<double> cum_env_;
  std::vector<double> cum_cos_;
  std::vector<double> cum_sin_;
};

Shot sample_shot(const TwoModeState& state, const WavePacket& wp, double theta, Rng& rng);

/// Separated-arm Mach-Zehnder: sequentially assigns each particle to arm a or b.
struct MziCounts {
  int arm_a = 0;
  int arm_b = 0;
};
MziCounts sample_mzi_shot(const TwoModeState& state, double theta, Rng& rng);

struct BinSpec {
  double lo = 0.0;
  double width = 0.0;
  std::size_t count = 0;

  /// Bins of the given width centered on 0 and covering [-half, half].
  static BinSpec covering(double half, double width);
  double center(std::size_t k) const { return lo + (static_cast<double>(k) + 0.5) * width; }
  std::optional<std::size_t> index(double x) const;
};

struct BinnedCounts {
  std::vector<double> mean;
  std::vector<double> variance;
  int m = 0;
};

BinnedCounts histogram(std::span<const Shot> shots, const BinSpec& bins);

/// m shots histogrammed. Bin width must not exceed 0.25/kappa.
BinnedCounts sample_binned(const TwoModeState& state, const WavePacket& wp, double theta, const BinSpec& bins, int m,
                           Rng& rng);

}  // namespace obd

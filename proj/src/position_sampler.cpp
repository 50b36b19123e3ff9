#include "obd/position_sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

namespace obd {

namespace {

// <a^+ b> of an unnormalized reduced state.
Complex raising_expectation(const Amplitudes& phi, int remaining) {
  Complex s{};
  for (int j = 0; j < remaining; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    s += std::conj(phi[uj + 1]) * phi[uj] * std::sqrt(static_cast<double>(j + 1) * (remaining - j));
  }
  return s;
}

void renormalize(ReducedState& s) {
  const double n2 = s.norm2();
  if (!(n2 > 1e-300) || !std::isfinite(n2)) {
    throw NumericalFailure("reduced state collapsed (norm^2 = " + std::to_string(n2) + ") with " +
                           std::to_string(s.remaining) + " particles left");
  }
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& a : s.amplitudes) a *= scale;
  s.log_weight += std::log(n2);
}

double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

}  // namespace

Rng make_rng(const SeedPath& path) {
  std::seed_seq seq{static_cast<std::uint32_t>(path.master), static_cast<std::uint32_t>(path.master >> 32),
                    static_cast<std::uint32_t>(path.stream), static_cast<std::uint32_t>(path.stream >> 32),
                    static_cast<std::uint32_t>(path.index), static_cast<std::uint32_t>(path.index >> 32)};
  return Rng(seq);
}

ReducedState ReducedState::from(const TwoModeState& state) {
  ReducedState r;
  r.amplitudes.assign(state.amplitudes().begin(), state.amplitudes().end());
  r.remaining = state.n_particles();
  return r;
}

double ReducedState::norm2() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return s;
}

ReducedState apply_mode_combination(const ReducedState& state, Complex alpha, Complex beta) {
  if (state.remaining < 1) throw DomainError("no particles left to detect");
  const int n = state.remaining;
  ReducedState out;
  out.remaining = n - 1;
  out.log_weight = state.log_weight;
  out.amplitudes.assign(static_cast<std::size_t>(n), Complex{});
  for (int k = 0; k < n; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    out.amplitudes[uk] = alpha * std::sqrt(static_cast<double>(k + 1)) * state.amplitudes[uk + 1] +
                         beta * std::sqrt(static_cast<double>(n - k)) * state.amplitudes[uk];
  }
  return out;
}

ReducedState apply_field_operator(const ReducedState& state, double x, double theta, const WavePacket& wp) {
  const double amp = std::sqrt(envelope_density(x, wp));
  const Complex phase = std::polar(1.0, 0.5 * (wp.kappa * x + theta));
  return apply_mode_combination(state, amp * phase, amp * std::conj(phase));
}

PatternSampler::PatternSampler(const WavePacket& wp, std::size_t grid_points) : wp_(wp) {
  wp_.validate();
  const double half = wp_.domain_half_width();
  if (grid_points == 0) {
    const double fringes = 2.0 * half / wp_.fringe_period();
    const auto wanted = static_cast<std::size_t>(std::ceil(64.0 * fringes));
    grid_points = std::bit_ceil(std::max<std::size_t>(4096, wanted));
  }
  if (grid_points < 16) throw DomainError("sampler grid too coarse");
  const std::size_t cells = grid_points - 1;
  const double h = 2.0 * half / static_cast<double>(cells);
  grid_.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) grid_[i] = -half + h * static_cast<double>(i);
  grid_.back() = half;

  cum_env_.assign(grid_points, 0.0);
  cum_cos_.assign(grid_points, 0.0);
  cum_sin_.assign(grid_points, 0.0);
  auto env = [&](double x) { return envelope_density(x, wp_); };
  // Simpson masses per cell.
  for (std::size_t i = 0; i < cells; ++i) {
    const double a = grid_[i];
    const double b = grid_[i + 1];
    const double m = 0.5 * (a + b);
    const double ga = env(a), gm = env(m), gb = env(b);
    const double k = wp_.kappa;
    const double w = (b - a) / 6.0;
    cum_env_[i + 1] = cum_env_[i] + w * (ga + 4.0 * gm + gb);
    cum_cos_[i + 1] = cum_cos_[i] + w * (ga * std::cos(k * a) + 4.0 * gm * std::cos(k * m) + gb * std::cos(k * b));
    cum_sin_[i + 1] = cum_sin_[i] + w * (ga * std::sin(k * a) + 4.0 * gm * std::sin(k * m) + gb * std::sin(k * b));
  }
}

double PatternSampler::invert(double a_cos, double b_sin, double u) const {
  auto cdf = [&](std::size_t i) { return cum_env_[i] + a_cos * cum_cos_[i] + b_sin * cum_sin_[i]; };
  const std::size_t last = grid_.size() - 1;
  const double total = cdf(last);
  if (!(total > 1e-300)) throw NumericalFailure("conditional density has no mass on the sampling grid");
  const double target = u * total;
  std::size_t lo = 0, hi = last;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (cdf(mid) <= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double c0 = cdf(lo);
  const double c1 = cdf(hi);
  const double frac = c1 > c0 ? std::clamp((target - c0) / (c1 - c0), 0.0, 1.0) : 0.5;
  return grid_[lo] + frac * (grid_[hi] - grid_[lo]);
}

Shot PatternSampler::sample(const TwoModeState& state, double theta, Rng& rng, const SeedPath& path) const {
  Shot shot;
  shot.theta_true = theta;
  shot.seed_path = path;
  shot.positions.reserve(static_cast<std::size_t>(state.n_particles()));

  const double cth = std::cos(theta);
  const double sth = std::sin(theta);
  ReducedState phi = ReducedState::from(state);
  while (phi.remaining > 0) {
    const Complex z = raising_expectation(phi.amplitudes, phi.remaining) / (phi.remaining * phi.norm2());
    // 1 + 2 Re(e^{-i(kx+theta)} z) expanded in cos kx and sin kx.
    const double a_cos = 2.0 * (z.real() * cth + z.imag() * sth);
    const double b_sin = 2.0 * (z.imag() * cth - z.real() * sth);
    const double x = invert(a_cos, b_sin, uniform01(rng));
    shot.positions.push_back(x);
    const Complex phase = std::polar(1.0, 0.5 * (wp_.kappa * x + theta));
    phi = apply_mode_combination(phi, phase, std::conj(phase));
    if (phi.remaining > 0) renormalize(phi);
  }
  return shot;
}

Shot sample_shot(const TwoModeState& state, const WavePacket& wp, double theta, Rng& rng) {
  return PatternSampler(wp).sample(state, theta, rng);
}

MziCounts sample_mzi_shot(const TwoModeState& state, double theta, Rng& rng) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  MziCounts counts;
  ReducedState phi = ReducedState::from(state);
  while (phi.remaining > 0) {
    // Output arms: A = a cos - b sin, B = a sin + b cos.
    ReducedState to_a = apply_mode_combination(phi, c, -s);
    ReducedState to_b = apply_mode_combination(phi, s, c);
    const double wa = to_a.norm2();
    const double wb = to_b.norm2();
    if (!(wa + wb > 1e-300)) throw NumericalFailure("MZI conditional weights vanished");
    if (uniform01(rng) * (wa + wb) < wa) {
      ++counts.arm_a;
      phi = std::move(to_a);
    } else {
      ++counts.arm_b;
      phi = std::move(to_b);
    }
    if (phi.remaining > 0) renormalize(phi);
  }
  return counts;
}

BinSpec BinSpec::covering(double half, double width) {
  if (!(width > 0.0) || !(half > 0.0)) throw DomainError("bins need positive width and extent");
  BinSpec b;
  b.width = width;
  b.count = static_cast<std::size_t>(std::llround(2.0 * half / width));
  if (b.count < 1) throw DomainError("bin width exceeds the domain");
  b.lo = -0.5 * width * static_cast<double>(b.count);
  return b;
}

std::optional<std::size_t> BinSpec::index(double x) const {
  const double t = (x - lo) / width;
  if (!(t >= 0.0)) return std::nullopt;
  auto k = static_cast<std::size_t>(t);
  if (k == count && t - static_cast<double>(count) < 1e-9) k = count - 1;  // upper domain edge
  if (k >= count) return std::nullopt;
  return k;
}

BinnedCounts histogram(std::span<const Shot> shots, const BinSpec& bins) {
  BinnedCounts out;
  out.m = static_cast<int>(shots.size());
  out.mean.assign(bins.count, 0.0);
  out.variance.assign(bins.count, 0.0);
  if (shots.empty()) return out;
  std::vector<double> sum_sq(bins.count, 0.0);
  std::vector<double> per_shot(bins.count, 0.0);
  for (const auto& shot : shots) {
    std::fill(per_shot.begin(), per_shot.end(), 0.0);
    for (double x : shot.positions) {
      if (auto k = bins.index(x)) per_shot[*k] += 1.0;
    }
    for (std::size_t k = 0; k < bins.count; ++k) {
      out.mean[k] += per_shot[k];
      sum_sq[k] += per_shot[k] * per_shot[k];
    }
  }
  const double m = static_cast<double>(shots.size());
  for (std::size_t k = 0; k < bins.count; ++k) {
    out.mean[k] /= m;
    if (shots.size() > 1) out.variance[k] = (sum_sq[k] - m * out.mean[k] * out.mean[k]) / (m - 1.0);
  }
  return out;
}

BinnedCounts sample_binned(const TwoModeState& state, const WavePacket& wp, double theta, const BinSpec& bins, int m,
                           Rng& rng) {
  if (bins.width > 0.25 / wp.kappa + 1e-12) throw DomainError("bin width must not exceed 0.25/kappa");
  if (m < 1) throw DomainError("need at least one shot");
  const PatternSampler sampler(wp);
  std::vector<Shot> shots;
  shots.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) shots.push_back(sampler.sample(state, theta, rng));
  return histogram(shots, bins);
}

}  // namespace obd

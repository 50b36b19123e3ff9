#include "obd/phase_estimation.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <numbers>
#include <vector>

namespace obd {

namespace {

constexpr double kFloor = 1e-300;

struct Candidate {
  double phi;
  double value;
};

Candidate refine(const std::function<double(double)>& objective, double lo, double hi) {
  // 1e-6 rad needs about 20 bits relative to O(1) arguments; 40 is ample.
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::brent_find_minima([&](double p) { return -objective(p); }, lo, hi, 40, iters);
  return {r.first, -r.second};
}

}  // namespace

double wrap_angle(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::remainder(phi, two_pi);
  if (w <= -std::numbers::pi) w += two_pi;
  return w;
}

Estimate maximize_scan(const std::function<double(double)>& objective, double lo, double hi, std::size_t points) {
  if (points < 3 || !(hi > lo)) throw DomainError("scan needs at least 3 points on a nonempty interval");
  const double h = (hi - lo) / static_cast<double>(points);
  std::vector<double> values(points);
  for (std::size_t i = 0; i < points; ++i) values[i] = objective(lo + h * static_cast<double>(i));

  // Local maxima on the scan, refined inside one step on either side.
  std::vector<Candidate> peaks;
  for (std::size_t i = 0; i < points; ++i) {
    const double left = i == 0 ? values[points - 1] : values[i - 1];
    const double right = i + 1 == points ? values[0] : values[i + 1];
    if (values[i] >= left && values[i] >= right) peaks.push_back({lo + h * static_cast<double>(i), values[i]});
  }
  if (peaks.empty()) throw NumericalFailure("likelihood scan found no maximum");
  std::sort(peaks.begin(), peaks.end(), [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
  if (peaks.size() > 4) peaks.resize(4);
  for (auto& p : peaks) p = refine(objective, p.phi - h, p.phi + h);
  std::sort(peaks.begin(), peaks.end(), [](const Candidate& a, const Candidate& b) { return a.value > b.value; });

  Estimate e;
  e.theta_hat = peaks.front().phi;
  e.log_likelihood = peaks.front().value;
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    const double gap = std::abs(wrap_angle(peaks[i].phi - peaks.front().phi));
    if (gap > 10.0 * kRefineTolerance && peaks.front().value - peaks[i].value < kRefineTolerance) e.ambiguous = true;
  }
  return e;
}

double log_likelihood(std::span<const Shot> shots, double phi, const PatternDensity& model, std::size_t* floored) {
  const PatternDensity at = model.with_theta(phi);
  double sum = 0.0;
  std::size_t count = 0;
  std::size_t hits = 0;
  for (const auto& shot : shots) {
    for (double x : shot.positions) {
      double p = at.p1(x);
      if (!(p > kFloor)) {
        p = kFloor;
        ++hits;
      }
      sum += std::log(p);
      ++count;
    }
  }
  if (count == 0) throw DomainError("no detected positions to estimate from");
  if (floored) *floored = hits;
  return sum;
}

Estimate mle_estimate(std::span<const Shot> shots, const PatternDensity& model) {
  // The envelope does not depend on phi; only the fringe factor is scanned.
  std::vector<double> c, s;
  for (const auto& shot : shots) {
    for (double x : shot.positions) {
      const double k = model.fringe_phase(x) - model.theta();
      c.push_back(std::cos(k));
      s.push_back(std::sin(k));
    }
  }
  if (c.empty()) throw DomainError("no detected positions to estimate from");
  const double nu = model.visibility();
  std::size_t floored = 0;
  auto fringe = [&](double phi, std::size_t* hits) {
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    double sum = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      double f = 1.0 + nu * (c[i] * cp - s[i] * sp);
      if (!(f > kFloor)) {
        f = kFloor;
        if (hits) ++*hits;
      }
      sum += std::log(f);
    }
    return sum;
  };
  Estimate e = maximize_scan([&](double phi) { return fringe(phi, nullptr); }, -std::numbers::pi, std::numbers::pi);
  e.theta_hat = wrap_angle(e.theta_hat);
  e.log_likelihood = log_likelihood(shots, e.theta_hat, model, &floored);
  e.floored = floored;
  return e;
}

double log_likelihood_mzi(std::span<const MziCounts> shots, double phi, const AngularMoments& moments,
                          int n_particles) {
  double na = 0.0, nb = 0.0;
  for (const auto& s : shots) {
    na += s.arm_a;
    nb += s.arm_b;
  }
  if (na + nb == 0.0) throw DomainError("no detected particles to estimate from");
  const double pa = 0.5 + (moments.jz * std::cos(phi) - moments.jx * std::sin(phi)) / n_particles;
  const double la = na > 0.0 ? na * std::log(std::max(pa, kFloor)) : 0.0;
  const double lb = nb > 0.0 ? nb * std::log(std::max(1.0 - pa, kFloor)) : 0.0;
  return la + lb;
}

Estimate mle_estimate_mzi(std::span<const MziCounts> shots, const AngularMoments& moments, int n_particles) {
  const double half = 0.5 * std::numbers::pi;
  auto objective = [&](double phi) { return log_likelihood_mzi(shots, phi, moments, n_particles); };
  // Open interval scan; the boundary is where the arm probability is stationary.
  Estimate e = maximize_scan(objective, -half, half);
  const double edges[] = {-half, half};
  for (double edge : edges) {
    const double v = objective(edge);
    if (v > e.log_likelihood) {
      e.theta_hat = edge;
      e.log_likelihood = v;
    }
  }
  e.theta_hat = std::clamp(e.theta_hat, -half, half);
  return e;
}

FitEstimate fit_estimate(std::span<const double> mean_counts, const BinSpec& bins, const PatternDensity& model,
                         double n_detected) {
  if (mean_counts.size() != bins.count) throw DomainError("counts do not match the bin layout");
  if (!(n_detected > 0.0)) throw DomainError("expected detections per shot must be positive");
  FitEstimate out;
  std::vector<double> env, c, s, nbar;
  double total = 0.0;
  for (std::size_t k = 0; k < bins.count; ++k) {
    const double x = bins.center(k);
    const double g = bins.width * n_detected * model.envelope(x);
    if (!(g > kFloor)) continue;  // model-empty bin
    if (mean_counts[k] == 0.0) ++out.empty_bins;
    const double ph = model.fringe_phase(x) - model.theta();
    env.push_back(g);
    c.push_back(std::cos(ph));
    s.push_back(std::sin(ph));
    nbar.push_back(mean_counts[k]);
    total += mean_counts[k];
  }
  if (!(total > 0.0)) throw DomainError("all bins are empty");
  const double nu = model.visibility();
  auto objective = [&](double phi) {
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    double sum = 0.0;
    for (std::size_t i = 0; i < env.size(); ++i) {
      const double mu = std::max(env[i] * (1.0 + nu * (c[i] * cp - s[i] * sp)), kFloor);
      sum += nbar[i] * std::log(mu) - mu;
    }
    return sum;
  };
  out.estimate = maximize_scan(objective, -std::numbers::pi, std::numbers::pi);
  out.estimate.theta_hat = wrap_angle(out.estimate.theta_hat);
  return out;
}

}  // namespace obd

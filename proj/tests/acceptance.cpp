// Acceptance suite: one PASS/FAIL line per criterion.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "obd/campaign.hpp"
#include "oracles.hpp"

using namespace obd;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s | %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const WavePacket kWp = WavePacket::dimensionless();
constexpr int kN = 100;
constexpr int kRep = 500;

double closed_form(const AngularMoments& m, int n) {
  const auto su = summarize(m, n);
  return variance_pattern(n, su.xi_phi.value(), su.visibility).variance_per_shot.value();
}

bool within(double value, double target, double stderr_, double k = 3.0) { return std::abs(value - target) <= k * stderr_; }

CampaignResult pattern_campaign(StateSpec state, int m, double theta, std::uint64_t seed, NoiseSpec noise = {}) {
  CampaignConfig c;
  c.n_particles = kN;
  c.m = m;
  c.n_rep = kRep;
  c.theta_true = theta;
  c.state = state;
  c.noise = noise;
  c.seed = seed;
  return run_campaign(c);
}

void criterion1() {
  const double turn = phase_squeezing_turning_point(kN);
  bool qfi_below = true;
  double best = 1e300, best_xi = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const auto m = moments(ground_state(kN, turn * i / 400.0));
    const double v = closed_form(m, kN);
    qfi_below = qfi_below && qfi_bound(m).value() <= v;
    if (v < best) {
      best = v;
      best_xi = summarize(m, kN).xi_phi.value();
    }
  }
  const auto opt = optimal_pattern_state(kN);
  const double xi = opt.summary.xi_phi.value();
  const bool pass = std::abs(xi - 0.44) <= 0.02 && opt.objective < 0.01 && qfi_below;
  report(1, pass, "closed form minimum over the ground-state family at xi_phi = 0.44 +- 0.02, below SNL, QFI below closed form",
         fmt("xi_opt=%.4f chi=%.6g var=%.6g (grid: xi=%.4f var=%.6g) qfi_below=%d", xi, opt.chi, opt.objective, best_xi,
             best, qfi_below));
}

void criterion2() {
  bool pass = true;
  std::ostringstream d;
  std::uint64_t seed = 200;
  for (double target : {0.44, 0.59, 0.72, 0.86}) {
    const auto r = pattern_campaign({StateSpec::Kind::XiPhi, target}, 10, 0.0, seed++);
    const double pred = r.predicted_variance.value();
    const bool ok = within(r.inclusive.variance, pred, r.inclusive.variance_stderr);
    pass = pass && ok;
    d << fmt("xi=%.2f m*var=%.5f+-%.5f closed=%.5f%s; ", target, 10 * r.inclusive.variance,
             10 * r.inclusive.variance_stderr, 10 * pred, ok ? "" : " (off)");
  }
  report(2, pass, "MC variance of the MLE at four xi_phi matches closed form within 3 stderr (N=100, m=10, n_rep=500)",
         d.str());
}

void criterion3() {
  bool pass = true;
  std::ostringstream d;
  for (int m : {1, 2, 5, 10}) {
    const auto r = pattern_campaign({StateSpec::Kind::Optimal, 0.0}, m, 0.0, 300 + m);
    const double mv = m * r.inclusive.variance;
    bool ok = mv < 0.01 && std::abs(r.inclusive.mean) <= 3 * r.inclusive.mean_stderr;
    if (m == 10) ok = ok && within(r.inclusive.variance, r.predicted_variance.value(), r.inclusive.variance_stderr);
    pass = pass && ok;
    d << fmt("m=%d m*var=%.5f+-%.5f mean=%.2e+-%.1e%s; ", m, mv, m * r.inclusive.variance_stderr, r.inclusive.mean,
             r.inclusive.mean_stderr, ok ? "" : " (off)");
  }
  d << fmt("closed=%.5f snl=0.01", closed_form(optimal_pattern_state(kN).moments, kN));
  report(3, pass, "m*variance below SNL for m in {1,2,5,10}, m=10 at closed form, mean consistent with 0", d.str());
}

void criterion4() {
  const std::vector<double> ns{50, 100, 200, 400, 800};
  std::vector<double> clean, qfi, noisy;
  for (double n : ns) {
    const int ni = static_cast<int>(n);
    const auto opt = optimal_pattern_state(ni);
    clean.push_back(opt.objective);
    qfi.push_back(qfi_bound(opt.moments).value());
    noisy.push_back(optimal_noisy_pattern_state(ni, 0.9, 0.2, 1.0).objective);
  }
  const auto fc = fit_power_law(ns, clean);
  const auto fq = fit_power_law(ns, qfi);
  const auto fn = fit_power_law(ns, noisy);
  auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  const bool ok_clean = in(fc.exponent, 1.28, 1.38) && in(fc.prefactor, 1.8, 2.2);
  const bool ok_qfi = in(fq.exponent, 1.28, 1.38) && in(fq.prefactor, 0.9, 1.1);
  const bool ok_noisy = in(fn.exponent, 1.11, 1.21) && in(fn.prefactor, 1.33, 1.63);
  report(4, ok_clean && ok_qfi && ok_noisy, "power-law fits over N in {50..800}: closed form, QFI, noisy closed form",
         fmt("closed form A=%.4f p=%.4f [A 1.8-2.2, p 1.28-1.38]%s; QFI A=%.4f p=%.4f [A 0.9-1.1]%s; "
             "noisy A=%.4f p=%.4f [A 1.33-1.63, p 1.11-1.21]%s",
             fc.prefactor, fc.exponent, ok_clean ? "" : " (off)", fq.prefactor, fq.exponent, ok_qfi ? "" : " (off)",
             fn.prefactor, fn.exponent, ok_noisy ? "" : " (off)"));
}

void criterion5() {
  NoiseSpec noise;
  noise.eta = 0.9;
  noise.sigma_blur = 0.2;
  const auto r = pattern_campaign({StateSpec::Kind::OptimalNoisy, 0.0}, 10, 0.0, 500, noise);
  const double pred = r.predicted_variance.value();
  const bool mc = within(r.inclusive.variance, pred, r.inclusive.variance_stderr);
  double worst = 0.0;
  const double turn = phase_squeezing_turning_point(kN);
  for (int i = 0; i <= 20; ++i) {
    const auto su = summarize(moments(ground_state(kN, turn * i / 20.0)), kN);
    const double a = variance_pattern(kN, su.xi_phi.value(), su.visibility).variance_per_shot.value();
    const double b = variance_pattern_noisy(kN, su.xi_phi.value(), su.visibility, 1.0, 0.0, 1.0).variance_per_shot.value();
    worst = std::max(worst, std::abs(a - b) / a);
  }
  report(5, mc && worst <= 1e-12, "noisy campaign (eta=0.9, sigma=0.2/kappa) matches the noisy closed form; noisy closed form -> closed form at eta=1, sigma=0",
         fmt("m*var=%.5f+-%.5f noisy=%.5f; max rel diff at eta=1,sigma=0: %.1e", 10 * r.inclusive.variance,
             10 * r.inclusive.variance_stderr, 10 * pred, worst));
}

void criterion6() {
  const auto opt = optimal_pattern_state(kN);
  const BinnedFit fit = fit_variance_pattern(PatternDensity(opt.moments, kN, kWp, 0.0), 0.2);
  const auto alpha = fluorescence_threshold(fit.variance_per_shot, fit.fisher_sum, kN);
  const bool pass = alpha.is_finite() && std::abs(alpha.value() - 2.2) <= 0.22;
  report(6, pass, "fluorescence SSN threshold alpha* = 2.2 +- 0.22 (dx=0.2/kappa, N=100, optimal state)",
         fmt("alpha*=%s fit var=%.6g", alpha.to_string().c_str(), fit.variance_per_shot));
}

void criterion7() {
  std::mt19937_64 rng(7007);
  const double peak = envelope_density(0.0, kWp);

  // (a) two-body density against the first-quantized oracle.
  double worst_p2 = 0.0;
  for (int n : {2, 3, 4}) {
    for (int t = 0; t < 4; ++t) {
      const auto c = oracle::random_state(n, rng, true);
      const TwoModeState s(n, Amplitudes(c.begin(), c.end()));
      const double theta = -1.0 + 0.7 * t;
      const oracle::FirstQuantized fq{n, c, kWp, theta};
      const PatternDensity d(moments(s), n, kWp, theta);
      for (double x1 = -20.0; x1 <= 20.0; x1 += 2.3) {
        for (double x2 = -20.0; x2 <= 20.0; x2 += 1.7) {
          worst_p2 = std::max(worst_p2, std::abs(p2_pattern(x1, x2, d) - fq.p2(x1, x2)) / (peak * peak));
        }
      }
    }
  }
  const bool ok_a = worst_p2 <= 1e-8;

  // (b) quadrature F1 and C in the F1/C formula against the closed form.
  double worst_pattern = 0.0;
  for (int n : {2, 3, 4}) {
    int used = 0;
    while (used < 5) {
      const auto c = oracle::random_state(n, rng, true);
      const TwoModeState s(n, Amplitudes(c.begin(), c.end()));
      const auto m = moments(s);
      const auto su = summarize(m, n);
      if (su.visibility < 0.2) continue;
      ++used;
      const PatternDensity d(m, n, kWp, 0.3 * used);
      const double pipeline = variance_mle(n, fisher_f1(d), correlation_c(d)).variance_per_shot.value();
      const double closed = variance_pattern(n, su.xi_phi.value(), su.visibility).variance_per_shot.value();
      worst_pattern = std::max(worst_pattern, std::abs(pipeline - closed) / closed);
    }
  }
  const bool ok_b = worst_pattern <= 0.005;

  // (c) MZI tables in the F1/C formula against the error-propagation formula.
  double worst_mzi = 0.0;
  auto mzi_check = [&](const TwoModeState& s, double theta) {
    const int n = s.n_particles();
    const auto m = moments(s);
    const MziDensities d = mzi_densities(theta, m, n);
    const double pipeline = variance_mle(n, fisher_f1(d), correlation_c(d)).variance_per_shot.value();
    const double closed = variance_mzi(m, theta).value();
    worst_mzi = std::max(worst_mzi, std::abs(pipeline - closed) / closed);
  };
  for (int n : {2, 3, 4}) {
    for (int t = 0; t < 5; ++t) {
      // Parity-symmetric amplitudes, the class the closed form is written for.
      auto c = oracle::random_state(n, rng, true);
      for (std::size_t j = 0, k = c.size() - 1; j < k; ++j, --k) c[j] = c[k] = 0.5 * (c[j] + c[k]);
      if (std::abs(moments(TwoModeState::normalized(n, Amplitudes(c.begin(), c.end()))).jx) < 0.05) continue;
      mzi_check(TwoModeState::normalized(n, Amplitudes(c.begin(), c.end())), -1.2 + 0.5 * t);
    }
  }
  mzi_check(optimal_pattern_state(kN).state, 0.3);
  const bool ok_c = worst_mzi <= 1e-10;

  // (d) sampler joint statistics: fringe-phase pair histogram, exchange
  // symmetry and the first-particle marginal.
  double min_chi = 1.0, min_ks_pair = 1.0, min_ks_first = 1.0;
  const PatternSampler sampler(kWp);
  for (int n : {2, 3, 4}) {
    const auto c = oracle::random_state(n, rng, true);
    const TwoModeState s(n, Amplitudes(c.begin(), c.end()));
    const double theta = 0.25 * n;
    const PatternDensity model(moments(s), n, kWp, theta);
    const auto sep = model.separable();
    constexpr int kBins = 6;
    std::vector<double> joint(kBins * kBins, 0.0), first, second;
    Rng shot_rng = make_rng({77, static_cast<std::uint64_t>(n), 0});
    auto phase_bin = [&](double x) {
      double p = std::fmod(model.fringe_phase(x), 2 * std::numbers::pi);
      if (p < 0) p += 2 * std::numbers::pi;
      return std::min<std::size_t>(kBins - 1, static_cast<std::size_t>(p / (2 * std::numbers::pi) * kBins));
    };
    for (int i = 0; i < 20000; ++i) {
      const auto pos = sampler.sample(s, theta, shot_rng).positions;
      joint[phase_bin(pos[0]) * kBins + phase_bin(pos[1])] += 1.0;
      first.push_back(pos[0]);
      second.push_back(pos[1]);
    }
    std::vector<double> probs;
    const double w = 2 * std::numbers::pi / kBins;
    for (int i = 0; i < kBins; ++i) {
      for (int j = 0; j < kBins; ++j) {
        const double a0 = w, a1 = std::sin((i + 1) * w) - std::sin(i * w), a2 = std::cos(i * w) - std::cos((i + 1) * w);
        const double b0 = w, b1 = std::sin((j + 1) * w) - std::sin(j * w), b2 = std::cos(j * w) - std::cos((j + 1) * w);
        probs.push_back((a0 * b0 + sep.visibility * (a1 * b0 + a0 * b1) + sep.cc * a1 * b1 + sep.ss * a2 * b2) /
                        (4 * std::numbers::pi * std::numbers::pi));
      }
    }
    min_chi = std::min(min_chi, oracle::chi_square_test(joint, probs));
    min_ks_pair = std::min(min_ks_pair, oracle::ks_two_sample(first, second));
    const oracle::P1Cdf cdf(model);
    first.resize(5000);
    min_ks_first = std::min(min_ks_first, oracle::ks_one_sample(first, cdf));
  }
  const bool ok_d = min_chi > 0.01 && min_ks_pair > 0.01 && min_ks_first > 0.01;

  report(7, ok_a && ok_b && ok_c && ok_d, "small-instance oracles (a) p2 (b) F1/C formula vs closed form (c) MZI tables vs MZI closed form (d) sampler",
         fmt("(a) max|dp2|/peak^2=%.2e%s (b) max rel=%.2e%s (c) max rel=%.2e%s (d) chi2 p=%.3f KS pair p=%.3f KS p1 "
             "p=%.3f%s",
             worst_p2, ok_a ? "" : " (off)", worst_pattern, ok_b ? "" : " (off)", worst_mzi, ok_c ? "" : " (off)",
             min_chi, min_ks_pair, min_ks_first, ok_d ? "" : " (off)"));
}

void criterion8() {
  std::vector<CampaignResult> runs;
  std::uint64_t seed = 800;
  for (double theta : {0.0, 1.0, 2.5}) runs.push_back(pattern_campaign({StateSpec::Kind::Optimal, 0.0}, 10, theta, seed++));
  bool mutual = true;
  std::ostringstream d;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& a = runs[i].inclusive;
    mutual = mutual && within(a.variance, runs[i].predicted_variance.value(), a.variance_stderr);
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      const auto& b = runs[j].inclusive;
      mutual = mutual && std::abs(a.variance - b.variance) <=
                             3 * std::sqrt(a.variance_stderr * a.variance_stderr + b.variance_stderr * b.variance_stderr);
    }
    d << fmt("theta=%.1f m*var=%.5f+-%.5f; ", runs[i].config.theta_true, 10 * a.variance, 10 * a.variance_stderr);
  }
  d << fmt("closed=%.5f; ", 10 * runs[0].predicted_variance.value());

  const auto coh = moments(ground_state(kN, 0.0));
  const double ratio_coherent =
      variance_mzi(coh, std::numbers::pi / 2 - 0.01).value() / variance_mzi(coh, 0.0).value();
  const auto opt = optimal_pattern_state(kN).moments;
  const double ratio_opt = variance_mzi(opt, std::numbers::pi / 2 - 0.01).value() / variance_mzi(opt, 0.0).value();
  d << fmt("MZI ratio at pi/2-0.01: coherent=%.4g (needs >1e3), optimal state=%.4g", ratio_coherent, ratio_opt);
  report(8, mutual && ratio_coherent > 1e3, "theta-independence of pattern MC; MZI divergence near pi/2 (coherent state)",
         d.str());
}

void criterion9() {
  const auto opt = optimal_pattern_state(kN);
  const PatternDensity d(opt.moments, kN, kWp, 0.0);
  const double f1c = variance_mle(kN, fisher_f1(d), correlation_c(d)).variance_per_shot.value();
  const double v1 = fit_variance_pattern(d, 0.05).variance_per_shot;
  const double v2 = fit_variance_pattern(d, 0.025).variance_per_shot;
  const double change = std::abs(v1 - v2) / v2;
  const double agree = std::max(std::abs(v1 - f1c), std::abs(v2 - f1c)) / f1c;
  report(9, change < 0.01 && agree < 0.01, "binned fit variance stable under dx halving 0.05 -> 0.025 and within 1% of the F1/C formula",
         fmt("fit(0.05)=%.7f fit(0.025)=%.7f f1c=%.7f change=%.2e max dev=%.2e", v1, v2, f1c, change, agree));
}

}  // namespace

int main() {
  try {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

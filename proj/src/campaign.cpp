#include "obd/campaign.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <numbers>

namespace obd {

namespace {

constexpr std::uint64_t kNoiseStream = std::uint64_t{1} << 32;
constexpr std::uint64_t kFluorescenceIndex = std::uint64_t{1} << 48;

struct RepOutcome {
  Estimate estimate;
  std::size_t clipped = 0;
  std::size_t empty_bins = 0;
};

RepOutcome run_repetition(const CampaignConfig& cfg, const PreparedState& prep, const PatternSampler* sampler,
                          const PatternDensity* model, const BinSpec* bins, std::uint64_t rep) {
  RepOutcome out;
  const auto m = static_cast<std::size_t>(cfg.m);
  if (cfg.protocol == Protocol::Mzi) {
    std::vector<MziCounts> shots;
    shots.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      Rng rng = make_rng({cfg.seed, rep, i});
      shots.push_back(sample_mzi_shot(prep.state, cfg.theta_true, rng));
    }
    out.estimate = mle_estimate_mzi(shots, prep.moments, cfg.n_particles);
    return out;
  }

  std::vector<Shot> shots;
  shots.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const SeedPath path{cfg.seed, rep, i};
    Rng rng = make_rng(path);
    Shot shot = sampler->sample(prep.state, cfg.theta_true, rng, path);
    if (cfg.noise.eta < 1.0 || cfg.noise.sigma_blur > 0.0) {
      Rng noise_rng = make_rng({cfg.seed, rep, kNoiseStream + i});
      shot = apply_position_noise(shot, cfg.noise, noise_rng);
    }
    shots.push_back(std::move(shot));
  }

  if (cfg.estimator == EstimatorKind::Mle) {
    out.estimate = mle_estimate(shots, *model);
    return out;
  }
  BinnedCounts counts = histogram(shots, *bins);
  std::vector<double> means = std::move(counts.mean);
  if (cfg.noise.alpha) {
    Rng rng = make_rng({cfg.seed, rep, kFluorescenceIndex});
    FluorescenceResult noisy = fluorescence(means, *cfg.noise.alpha, cfg.m, rng);
    means = std::move(noisy.counts);
    out.clipped = noisy.clipped;
  }
  FitEstimate fit = fit_estimate(means, *bins, *model, cfg.noise.eta * cfg.n_particles);
  out.estimate = fit.estimate;
  out.empty_bins = fit.empty_bins;
  return out;
}

}  // namespace

void CampaignConfig::validate() const {
  if (n_particles < 2) throw DomainError("n_particles must be >= 2");
  if (m < 1) throw DomainError("m must be >= 1");
  if (n_rep < 2) throw DomainError("n_rep must be >= 2");
  if (!(theta_true > -std::numbers::pi && theta_true <= std::numbers::pi)) {
    throw DomainError("theta_true must lie in (-pi, pi]");
  }
  noise.validate();
  wavepacket().validate();
  if (protocol == Protocol::Mzi) {
    if (estimator != EstimatorKind::Mle) throw DomainError("the MZI protocol only supports the mle estimator");
    if (!noise.is_identity()) throw DomainError("detection noise is only modeled for the pattern protocol");
  }
  if (estimator == EstimatorKind::Fit && !(bin_width > 0.0 && bin_width <= 0.25 + 1e-12)) {
    throw DomainError("bin_width must lie in (0, 0.25/kappa]");
  }
  if (estimator == EstimatorKind::Mle && noise.alpha) {
    throw DomainError("fluorescence noise applies to binned counts; use the fit estimator");
  }
}

PreparedState prepare_state(const CampaignConfig& cfg) {
  const int n = cfg.n_particles;
  auto finish = [&](TwoModeState s, double chi) {
    AngularMoments mo = moments(s);
    SqueezingSummary su = summarize(mo, n);
    return PreparedState{std::move(s), chi, mo, su};
  };
  switch (cfg.state.kind) {
    case StateSpec::Kind::Chi:
      return finish(ground_state(n, cfg.state.value), cfg.state.value);
    case StateSpec::Kind::XiPhi: {
      const double chi = chi_for_phase_squeezing(n, cfg.state.value);
      return finish(ground_state(n, chi), chi);
    }
    case StateSpec::Kind::Gaussian:
      return finish(gaussian_phase_squeezed(n, cfg.state.value), std::numeric_limits<double>::quiet_NaN());
    case StateSpec::Kind::Optimal: {
      OptimalState o = optimal_pattern_state(n);
      return PreparedState{std::move(o.state), o.chi, o.moments, o.summary};
    }
    case StateSpec::Kind::OptimalNoisy: {
      OptimalState o = optimal_noisy_pattern_state(n, cfg.noise.eta, cfg.noise.sigma_blur, 1.0);
      return PreparedState{std::move(o.state), o.chi, o.moments, o.summary};
    }
    case StateSpec::Kind::Coherent:
      return finish(ground_state(n, 0.0), 0.0);
  }
  throw DomainError("unknown state kind");
}

SampleStats deviation_stats(std::span<const double> estimates, double theta_true) {
  SampleStats s;
  s.count = estimates.size();
  if (s.count < 2) {
    s.mean = s.count == 1 ? estimates[0] : theta_true;
    s.variance = std::numeric_limits<double>::quiet_NaN();
    s.variance_stderr = s.mean_stderr = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  const double n = static_cast<double>(s.count);
  double sum = 0.0;
  for (double e : estimates) sum += wrap_angle(e - theta_true);
  const double mean_dev = sum / n;
  double ss = 0.0;
  for (double e : estimates) {
    const double d = wrap_angle(e - theta_true) - mean_dev;
    ss += d * d;
  }
  s.mean = theta_true + mean_dev;
  s.variance = ss / (n - 1.0);
  s.variance_stderr = s.variance * std::sqrt(2.0 / (n - 1.0));
  s.mean_stderr = std::sqrt(s.variance / n);
  return s;
}

bool CampaignResult::all_checks_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

ExtendedReal predicted_variance(const CampaignConfig& cfg, const PreparedState& prep, std::string* formula) {
  auto label = [&](const char* f) {
    if (formula) *formula = f;
  };
  const double m = cfg.m;
  const int n = cfg.n_particles;
  if (cfg.protocol == Protocol::Mzi) {
    label("mzi_error_propagation");
    const ExtendedReal v = variance_mzi(prep.moments, cfg.theta_true);
    return v.is_finite() ? ExtendedReal::finite(v.value() / m) : v;
  }
  if (!prep.summary.xi_phi.is_finite()) {
    label("none");
    return ExtendedReal::undefined();
  }
  const double xi = prep.summary.xi_phi.value();
  const double nu = prep.summary.visibility;
  const bool noisy = cfg.noise.eta < 1.0 || cfg.noise.sigma_blur > 0.0;
  if (cfg.estimator == EstimatorKind::Mle) {
    if (!noisy) {
      label("pattern_closed_form");
      const ExtendedReal v = variance_pattern(n, xi, nu).variance_per_shot;
      return v.is_finite() ? ExtendedReal::finite(v.value() / m) : v;
    }
    label("pattern_noisy_closed_form");
    const ExtendedReal v = variance_pattern_noisy(n, xi, nu, cfg.noise.eta, cfg.noise.sigma_blur, 1.0).variance_per_shot;
    return v.is_finite() ? ExtendedReal::finite(v.value() / m) : v;
  }
  if (cfg.noise.eta < 1.0) {
    // The binned kernel is only derived for a fixed particle number.
    label("none");
    return ExtendedReal::undefined();
  }
  const PatternDensity model(prep.moments, n, cfg.wavepacket(), cfg.theta_true, cfg.noise.sigma_blur);
  const BinnedFit fit = fit_variance_pattern(model, cfg.bin_width);
  if (cfg.noise.alpha) {
    label("binned_fit_fluorescence");
    return ExtendedReal::finite(variance_fit_fluorescence(fit.variance_per_shot, *cfg.noise.alpha, fit.fisher_sum) / m);
  }
  label("binned_fit");
  return ExtendedReal::finite(fit.variance_per_shot / m);
}

CampaignResult run_campaign(const CampaignConfig& config) {
  config.validate();
  CampaignResult result{.config = config, .prepared = prepare_state(config)};
  result.predicted_variance = predicted_variance(config, result.prepared, &result.prediction_formula);

  const WavePacket wp = config.wavepacket();
  std::optional<PatternSampler> sampler;
  std::optional<PatternDensity> model;
  std::optional<BinSpec> bins;
  if (config.protocol == Protocol::Pattern) {
    sampler.emplace(wp);
    model.emplace(result.prepared.moments, config.n_particles, wp, 0.0, config.noise.sigma_blur);
    if (config.estimator == EstimatorKind::Fit) {
      bins = BinSpec::covering(WavePacket::kDomainWidths * model->envelope_sd(), config.bin_width);
    }
  }

  const auto n_rep = static_cast<std::size_t>(config.n_rep);
  std::vector<RepOutcome> outcomes(n_rep);
  std::vector<std::exception_ptr> errors(n_rep);
  const auto signed_reps = static_cast<long long>(n_rep);
#pragma omp parallel for schedule(dynamic)
  for (long long r = 0; r < signed_reps; ++r) {
    const auto i = static_cast<std::size_t>(r);
    try {
      outcomes[i] = run_repetition(config, result.prepared, sampler ? &*sampler : nullptr, model ? &*model : nullptr,
                                   bins ? &*bins : nullptr, i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> kept;
  bool all_finite = true;
  for (const auto& o : outcomes) {
    result.estimates.push_back(o.estimate.theta_hat);
    result.ambiguous.push_back(o.estimate.ambiguous);
    result.ambiguous_count += o.estimate.ambiguous ? 1 : 0;
    result.floored_count += o.estimate.floored;
    result.clipped_count += o.clipped;
    result.empty_bin_count += o.empty_bins;
    all_finite = all_finite && std::isfinite(o.estimate.theta_hat);
    if (!o.estimate.ambiguous) kept.push_back(o.estimate.theta_hat);
  }
  result.inclusive = deviation_stats(result.estimates, config.theta_true);
  result.exclusive = deviation_stats(kept, config.theta_true);
  result.checks.push_back({"all_estimates_finite", all_finite});
  result.checks.push_back({"repetition_count", result.estimates.size() == n_rep});
  return result;
}

}  // namespace obd

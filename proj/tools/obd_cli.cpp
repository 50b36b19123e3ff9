// obd: figure reproduction, custom campaigns and state/density export.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "obd/campaign.hpp"
#include "obd/serialization.hpp"

namespace fs = std::filesystem;
using namespace obd;

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct RunContext {
  std::string command_line;
  fs::path out_dir;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

fs::path default_output_dir() {
  if (const char* env = std::getenv("OBD_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw DomainError("cannot write " + path.string());
  os.precision(17);
  return os;
}

void write_csv_header(std::ostream& os, const std::string& columns) {
  os << "# schema_version=" << kSchemaVersion << "\n" << columns << "\n";
}

/// Writes <output>.manifest.json next to the output file.
void write_manifest(const RunContext& ctx, const std::string& command, const Json& config, std::uint64_t seed,
                    const std::vector<fs::path>& outputs, const Json& extra = Json::object()) {
  Json m;
  m["schema_version"] = kSchemaVersion;
  m["tool_version"] = kToolVersion;
  m["command"] = command;
  m["command_line"] = ctx.command_line;
  m["config"] = config;
  m["master_seed"] = seed;
  Json paths = Json::array();
  for (const auto& p : outputs) paths.push_back(p.string());
  m["outputs"] = paths;
  for (const auto& [k, v] : extra.items()) m[k] = v;
  m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  auto os = open_output(fs::path(outputs.front().string() + ".manifest.json"));
  os << m.dump(2) << "\n";
}

struct StateOptions {
  std::optional<double> chi;
  std::optional<double> xi;
  std::optional<double> gaussian;
  bool coherent = false;

  StateSpec spec() const {
    if (chi) return {StateSpec::Kind::Chi, *chi};
    if (xi) return {StateSpec::Kind::XiPhi, *xi};
    if (gaussian) return {StateSpec::Kind::Gaussian, *gaussian};
    if (coherent) return {StateSpec::Kind::Coherent, 0.0};
    return {StateSpec::Kind::Optimal, 0.0};
  }
};

void add_state_options(CLI::App* app, StateOptions& s) {
  auto* g = app->add_option_group("state", "input state (default: ground state minimizing the closed-form variance)");
  g->add_option("--chi", s.chi, "ground state of -Jx + chi Jz^2");
  g->add_option("--xi", s.xi, "ground state with this phase squeezing");
  g->add_option("--gaussian", s.gaussian, "Gaussian phase-squeezed state with this parameter");
  g->add_flag("--coherent", s.coherent, "coherent spin state");
  g->require_option(0, 1);
}

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> v;
  for (int i = 0; i < points; ++i) v.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
  return v;
}

std::string csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_extended(const ExtendedReal& v) { return v.is_finite() ? csv_double(v.value()) : v.to_string(); }

// fig2 ---------------------------------------------------------------------

struct Fig2Options {
  int n = 100;
  int points = 61;
  std::vector<double> xi_grid;
  bool mc = false;
  int m = 10;
  int n_rep = 500;
  std::uint64_t seed = 1;
  std::string out = "fig2.csv";
};

int run_fig2(const Fig2Options& o, const RunContext& ctx) {
  std::vector<CampaignConfig> rows;
  auto base = [&] {
    CampaignConfig c;
    c.n_particles = o.n;
    c.m = o.m;
    c.n_rep = o.n_rep;
    c.seed = o.seed;
    return c;
  };
  if (!o.xi_grid.empty()) {
    for (double xi : o.xi_grid) {
      auto c = base();
      c.state = {StateSpec::Kind::XiPhi, xi};
      rows.push_back(c);
    }
  } else {
    const double turn = phase_squeezing_turning_point(o.n);
    for (double chi : linspace(turn, 0.0, o.points)) {
      auto c = base();
      c.state = {StateSpec::Kind::Chi, chi};
      rows.push_back(c);
    }
  }

  const fs::path path = ctx.out_dir / o.out;
  auto os = open_output(path);
  write_csv_header(os, std::string("chi,xi_phi,nu,closed_form_variance,squeezing_term_only,qfi_bound") +
                           (o.mc ? ",mc_variance,mc_stderr" : ""));
  bool qfi_below = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& c = rows[i];
    c.seed = o.seed + i;
    const auto prep = prepare_state(c);
    const auto& su = prep.summary;
    const auto report = variance_pattern(o.n, su.xi_phi.value(), su.visibility);
    const double closed = report.variance_per_shot.value();
    const double squeezing = su.xi_phi.value() * su.xi_phi.value() / o.n;
    const auto qfi = qfi_bound(prep.moments);
    if (qfi.is_finite() && qfi.value() > closed * (1.0 + 1e-12)) qfi_below = false;
    os << csv_double(prep.chi) << ',' << csv_double(su.xi_phi.value()) << ',' << csv_double(su.visibility) << ','
       << csv_double(closed) << ',' << csv_double(squeezing) << ',' << csv_extended(qfi);
    if (o.mc) {
      const auto r = run_campaign(c);
      if (!r.all_checks_passed()) throw InvariantViolation("campaign check failed at row " + std::to_string(i));
      os << ',' << csv_double(o.m * r.inclusive.variance) << ',' << csv_double(o.m * r.inclusive.variance_stderr);
    }
    os << "\n";
  }
  os.close();
  write_manifest(ctx, "fig2", config_to_json(base()), o.seed, {path},
                 Json{{"points", rows.size()}, {"with_mc", o.mc}, {"seed_rule", "row i uses seed + i"}});
  if (!qfi_below) throw InvariantViolation("qfi bound above the closed-form variance on the fig2 grid");
  return 0;
}

// fig3 ---------------------------------------------------------------------

struct Fig3Options {
  int n = 100;
  int m_max = 10;
  int n_rep = 500;
  std::uint64_t seed = 1;
  double theta = 0.0;
  std::string out = "fig3.csv";
};

int run_fig3(const Fig3Options& o, const RunContext& ctx) {
  if (o.m_max < 1) throw DomainError("--mmax must be at least 1");
  CampaignConfig base;
  base.n_particles = o.n;
  base.n_rep = o.n_rep;
  base.theta_true = o.theta;
  base.seed = o.seed;
  const fs::path path = ctx.out_dir / o.out;
  auto os = open_output(path);
  write_csv_header(os, "m,m_variance,stderr,mean,mean_stderr,snl,closed_form");
  for (int m = 1; m <= o.m_max; ++m) {
    auto c = base;
    c.m = m;
    c.seed = o.seed + static_cast<std::uint64_t>(m);
    const auto r = run_campaign(c);
    if (!r.all_checks_passed()) throw InvariantViolation("campaign check failed at m=" + std::to_string(m));
    const ExtendedReal per_shot =
        r.predicted_variance.is_finite() ? ExtendedReal::finite(m * r.predicted_variance.value()) : r.predicted_variance;
    os << m << ',' << csv_double(m * r.inclusive.variance) << ',' << csv_double(m * r.inclusive.variance_stderr) << ','
       << csv_double(r.inclusive.mean) << ',' << csv_double(r.inclusive.mean_stderr) << ','
       << csv_double(1.0 / o.n) << ',' << csv_extended(per_shot) << "\n";
  }
  os.close();
  write_manifest(ctx, "fig3", config_to_json(base), o.seed, {path},
                 Json{{"m_max", o.m_max}, {"seed_rule", "row m uses seed + m"}});
  return 0;
}

// fig4 ---------------------------------------------------------------------

struct Fig4Options {
  int n = 100;
  double sigma_max = 1.0;
  int points = 21;
  std::vector<double> etas{1.0, 0.9, 0.8, 0.7};
  bool scaling = false;
  std::vector<int> scaling_n{50, 100, 200, 400, 800};
  double eta = 0.9;
  double sigma = 0.2;
  std::string out = "fig4.csv";
};

int run_fig4(const Fig4Options& o, const RunContext& ctx) {
  const fs::path path = ctx.out_dir / o.out;
  auto os = open_output(path);
  Json extra;
  if (!o.scaling) {
    write_csv_header(os, "sigma,eta,chi,xi_phi,nu,variance");
    for (double eta : o.etas) {
      for (double sigma : linspace(0.0, o.sigma_max, o.points)) {
        const auto opt = optimal_noisy_pattern_state(o.n, eta, sigma, 1.0);
        os << csv_double(sigma) << ',' << csv_double(eta) << ',' << csv_double(opt.chi) << ','
           << csv_double(opt.summary.xi_phi.value()) << ',' << csv_double(opt.summary.visibility) << ','
           << csv_double(opt.objective) << "\n";
      }
    }
    extra = Json{{"n_particles", o.n}, {"sigma_max", o.sigma_max}, {"points", o.points}, {"etas", o.etas}};
  } else {
    write_csv_header(os, "n,clean_variance,noisy_variance,qfi_bound");
    std::vector<double> ns, clean, noisy;
    for (int n : o.scaling_n) {
      const auto opt = optimal_pattern_state(n);
      const auto opt_noisy = optimal_noisy_pattern_state(n, o.eta, o.sigma, 1.0);
      ns.push_back(n);
      clean.push_back(opt.objective);
      noisy.push_back(opt_noisy.objective);
      os << n << ',' << csv_double(opt.objective) << ',' << csv_double(opt_noisy.objective) << ','
         << csv_extended(qfi_bound(opt.moments)) << "\n";
    }
    const auto fc = fit_power_law(ns, clean);
    const auto fn = fit_power_law(ns, noisy);
    extra = Json{{"n_grid", o.scaling_n},
                 {"eta", o.eta},
                 {"sigma", o.sigma},
                 {"fit_clean", {{"prefactor", fc.prefactor}, {"exponent", fc.exponent}}},
                 {"fit_noisy", {{"prefactor", fn.prefactor}, {"exponent", fn.exponent}}}};
    std::printf("clean: %.4f N^-%.4f\nnoisy: %.4f N^-%.4f\n", fc.prefactor, fc.exponent, fn.prefactor, fn.exponent);
  }
  os.close();
  write_manifest(ctx, o.scaling ? "fig4 --scaling" : "fig4", Json::object(), 0, {path}, extra);
  return 0;
}

// campaign -----------------------------------------------------------------

struct CampaignOverrides {
  std::string config_file;
  std::optional<int> n, m, n_rep;
  std::optional<std::uint64_t> seed;
  std::optional<double> theta, eta, sigma, alpha, bin_width;
  std::string out = "campaign";
};

int run_campaign_cmd(const CampaignOverrides& o, const RunContext& ctx) {
  std::ifstream is(o.config_file);
  if (!is) throw DomainError("cannot read " + o.config_file);
  Json j;
  try {
    j = Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(o.config_file + ": " + e.what());
  }
  CampaignConfig c = config_from_json(j);
  if (o.n) c.n_particles = *o.n;
  if (o.m) c.m = *o.m;
  if (o.n_rep) c.n_rep = *o.n_rep;
  if (o.seed) c.seed = *o.seed;
  if (o.theta) c.theta_true = *o.theta;
  if (o.eta) c.noise.eta = *o.eta;
  if (o.sigma) c.noise.sigma_blur = *o.sigma;
  if (o.alpha) c.noise.alpha = *o.alpha;
  if (o.bin_width) c.bin_width = *o.bin_width;

  const auto r = run_campaign(c);
  const fs::path json_path = ctx.out_dir / (o.out + "_result.json");
  const fs::path csv_path = ctx.out_dir / (o.out + "_estimates.csv");
  {
    auto os = open_output(json_path);
    os << result_to_json(r).dump(2) << "\n";
  }
  {
    auto os = open_output(csv_path);
    write_estimates_csv(os, r);
  }
  write_manifest(ctx, "campaign", config_to_json(c), c.seed, {json_path, csv_path});
  std::printf("variance=%.6g +- %.3g predicted=%s (%s) mean=%.4g +- %.3g\n", r.inclusive.variance,
              r.inclusive.variance_stderr, r.predicted_variance.to_string().c_str(), r.prediction_formula.c_str(),
              r.inclusive.mean, r.inclusive.mean_stderr);
  if (!r.all_checks_passed()) {
    for (const auto& chk : r.checks) {
      if (!chk.passed) std::fprintf(stderr, "check failed: %s\n", chk.name.c_str());
    }
    return 3;
  }
  return 0;
}

// state / density ----------------------------------------------------------

struct StateCmdOptions {
  int n = 100;
  StateOptions state;
  std::string out = "state.json";
};

PreparedState prepare(int n, const StateOptions& s) {
  CampaignConfig c;
  c.n_particles = n;
  c.state = s.spec();
  return prepare_state(c);
}

int run_state(const StateCmdOptions& o, const RunContext& ctx) {
  const auto prep = prepare(o.n, o.state);
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["chi"] = std::isfinite(prep.chi) ? Json(prep.chi) : Json(nullptr);
  j["xi_phi"] = extended_to_json(prep.summary.xi_phi);
  j["xi_n"] = extended_to_json(prep.summary.xi_n);
  j["visibility"] = prep.summary.visibility;
  j["state"] = state_to_json(prep.state);
  const fs::path path = ctx.out_dir / o.out;
  {
    auto os = open_output(path);
    os << j.dump(2) << "\n";
  }
  CampaignConfig c;
  c.n_particles = o.n;
  c.state = o.state.spec();
  write_manifest(ctx, "state", config_to_json(c), 0, {path});
  return 0;
}

struct DensityOptions {
  int n = 100;
  StateOptions state;
  double theta = 0.0;
  double sigma = 0.0;
  double lo = -30.0;
  double hi = 30.0;
  int points = 2001;
  double kappa_width = WavePacket::kDefaultFringeProduct;
  std::string out = "density.csv";
};

int run_density(const DensityOptions& o, const RunContext& ctx) {
  if (o.points < 2 || !(o.hi > o.lo)) throw DomainError("density grid needs hi > lo and at least 2 points");
  const auto prep = prepare(o.n, o.state);
  const PatternDensity model(prep.moments, o.n, WavePacket::dimensionless(o.kappa_width), o.theta, o.sigma);
  const fs::path path = ctx.out_dir / o.out;
  auto os = open_output(path);
  write_csv_header(os, "x,p1");
  for (double x : linspace(o.lo, o.hi, o.points)) os << csv_double(x) << ',' << csv_double(model.p1(x)) << "\n";
  os.close();
  CampaignConfig c;
  c.n_particles = o.n;
  c.theta_true = o.theta;
  c.state = o.state.spec();
  c.kappa_width = o.kappa_width;
  c.noise.sigma_blur = o.sigma;
  write_manifest(ctx, "density", config_to_json(c), 0, {path},
                 Json{{"grid", {{"lo", o.lo}, {"hi", o.hi}, {"points", o.points}}}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-body-density phase estimation: figures, campaigns, states and densities"};
  app.require_subcommand(1);
  std::string out_dir = default_output_dir().string();
  app.add_option("--out-dir", out_dir, "output directory (default $OBD_OUTPUT_DIR or .)");

  Fig2Options f2;
  auto* fig2 = app.add_subcommand("fig2", "closed-form variance, squeezing term and QFI bound over the ground-state family");
  fig2->add_option("--n", f2.n, "particle number");
  fig2->add_option("--points", f2.points, "chi grid points between the turning point and 0");
  fig2->add_option("--xi", f2.xi_grid, "explicit xi_phi grid instead of the chi grid")->delimiter(',');
  fig2->add_flag("--mc", f2.mc, "add Monte-Carlo MLE variances");
  fig2->add_option("--m", f2.m, "shots per estimate");
  fig2->add_option("--nrep", f2.n_rep, "repetitions");
  fig2->add_option("--seed", f2.seed, "master seed");
  fig2->add_option("--out", f2.out, "output CSV");

  Fig3Options f3;
  auto* fig3 = app.add_subcommand("fig3", "m * variance of the MLE for m = 1..mmax at the optimal state");
  fig3->add_option("--n", f3.n, "particle number");
  fig3->add_option("--mmax", f3.m_max, "largest m");
  fig3->add_option("--nrep", f3.n_rep, "repetitions");
  fig3->add_option("--seed", f3.seed, "master seed");
  fig3->add_option("--theta", f3.theta, "true phase");
  fig3->add_option("--out", f3.out, "output CSV");

  Fig4Options f4;
  auto* fig4 = app.add_subcommand("fig4", "noisy optimal variance over sigma and eta, or its N scaling");
  fig4->add_option("--n", f4.n, "particle number");
  fig4->add_option("--sigma-max", f4.sigma_max, "largest blur, units of 1/kappa");
  fig4->add_option("--points", f4.points, "sigma grid points");
  fig4->add_option("--etas", f4.etas, "detection efficiencies")->delimiter(',');
  fig4->add_flag("--scaling", f4.scaling, "optimal variance over N with power-law fits");
  fig4->add_option("--scaling-n", f4.scaling_n, "N grid for --scaling")->delimiter(',');
  fig4->add_option("--eta", f4.eta, "efficiency for --scaling");
  fig4->add_option("--sigma", f4.sigma, "blur for --scaling, units of 1/kappa");
  fig4->add_option("--out", f4.out, "output CSV");

  CampaignOverrides co;
  auto* campaign = app.add_subcommand("campaign", "run a campaign from a JSON config");
  campaign->add_option("config", co.config_file, "config JSON")->required();
  campaign->add_option("--n", co.n, "particle number");
  campaign->add_option("--m", co.m, "shots per estimate");
  campaign->add_option("--nrep", co.n_rep, "repetitions");
  campaign->add_option("--seed", co.seed, "master seed");
  campaign->add_option("--theta", co.theta, "true phase");
  campaign->add_option("--eta", co.eta, "detection efficiency");
  campaign->add_option("--sigma", co.sigma, "position blur, units of 1/kappa");
  campaign->add_option("--alpha", co.alpha, "fluorescence photons per atom");
  campaign->add_option("--binwidth", co.bin_width, "fit bin width, units of 1/kappa");
  campaign->add_option("--out", co.out, "output stem");

  StateCmdOptions so;
  auto* state = app.add_subcommand("state", "write a state as JSON");
  state->add_option("--n", so.n, "particle number");
  add_state_options(state, so.state);
  state->add_option("--out", so.out, "output JSON");

  DensityOptions d;
  auto* density = app.add_subcommand("density", "write the one-body density as CSV");
  density->add_option("--n", d.n, "particle number");
  add_state_options(density, d.state);
  density->add_option("--theta", d.theta, "phase");
  density->add_option("--sigma", d.sigma, "position blur, units of 1/kappa");
  density->add_option("--lo", d.lo, "grid start");
  density->add_option("--hi", d.hi, "grid end");
  density->add_option("--points", d.points, "grid points");
  density->add_option("--kappa-width", d.kappa_width, "kappa times envelope width");
  density->add_option("--out", d.out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  RunContext ctx;
  for (int i = 0; i < argc; ++i) ctx.command_line += (i ? " " : "") + std::string(argv[i]);
  ctx.out_dir = out_dir;

  try {
    if (*fig2) return run_fig2(f2, ctx);
    if (*fig3) return run_fig3(f3, ctx);
    if (*fig4) return run_fig4(f4, ctx);
    if (*campaign) return run_campaign_cmd(co, ctx);
    if (*state) return run_state(so, ctx);
    if (*density) return run_density(d, ctx);
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const NumericalFailure& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

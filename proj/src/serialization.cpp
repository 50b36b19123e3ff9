#include "obd/serialization.hpp"

#include <iomanip>
#include <ostream>
#include <set>
#include <string>

namespace obd {

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw DomainError(path + ": " + what);
}

void reject_unknown(const Json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) schema_error(path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) schema_error(path + "." + key, "unknown key");
  }
}

double get_number(const Json& j, const std::string& key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number()) schema_error(path + "." + key, "expected a number");
  return v.get<double>();
}

long long get_integer(const Json& j, const std::string& key, const std::string& path, long long fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) schema_error(path + "." + key, "expected an integer");
  return v.get<long long>();
}

std::string get_string(const Json& j, const std::string& key, const std::string& path, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_string()) schema_error(path + "." + key, "expected a string");
  return v.get<std::string>();
}

int to_int(long long v, const std::string& path) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) schema_error(path, "out of range");
  return static_cast<int>(v);
}

const char* kind_name(StateSpec::Kind k) {
  switch (k) {
    case StateSpec::Kind::Chi: return "chi";
    case StateSpec::Kind::XiPhi: return "xi_phi";
    case StateSpec::Kind::Gaussian: return "gaussian";
    case StateSpec::Kind::Optimal: return "optimal";
    case StateSpec::Kind::OptimalNoisy: return "optimal_noisy";
    case StateSpec::Kind::Coherent: return "coherent";
  }
  return "?";
}

}  // namespace

Json extended_to_json(const ExtendedReal& v) {
  if (v.is_finite()) return v.value();
  return v.to_string();
}

Json state_to_json(const TwoModeState& state) {
  Json re = Json::array();
  Json im = Json::array();
  for (const auto& c : state.amplitudes()) {
    re.push_back(c.real());
    im.push_back(c.imag());
  }
  return Json{{"n", state.n_particles()}, {"re", re}, {"im", im}};
}

TwoModeState state_from_json(const Json& j) {
  reject_unknown(j, "state", {"n", "re", "im"});
  if (!j.contains("n") || !j.contains("re") || !j.contains("im")) schema_error("state", "needs n, re and im");
  const int n = to_int(get_integer(j, "n", "state", 0), "state.n");
  const Json& re = j.at("re");
  const Json& im = j.at("im");
  if (!re.is_array() || !im.is_array() || re.size() != im.size()) {
    schema_error("state", "re and im must be arrays of equal length");
  }
  Amplitudes a;
  for (std::size_t i = 0; i < re.size(); ++i) {
    if (!re[i].is_number() || !im[i].is_number()) schema_error("state.re", "expected numbers");
    a.emplace_back(re[i].get<double>(), im[i].get<double>());
  }
  return TwoModeState(n, std::move(a));
}

CampaignConfig config_from_json(const Json& j) {
  const std::string root = "config";
  reject_unknown(j, root,
                 {"protocol", "estimator", "n_particles", "m", "n_rep", "theta_true", "seed", "state", "wavepacket",
                  "noise", "bin_width"});
  CampaignConfig c;
  const std::string protocol = get_string(j, "protocol", root, "pattern");
  if (protocol == "pattern") {
    c.protocol = Protocol::Pattern;
  } else if (protocol == "mzi") {
    c.protocol = Protocol::Mzi;
  } else {
    schema_error(root + ".protocol", "expected \"pattern\" or \"mzi\"");
  }
  const std::string estimator = get_string(j, "estimator", root, "mle");
  if (estimator == "mle") {
    c.estimator = EstimatorKind::Mle;
  } else if (estimator == "fit") {
    c.estimator = EstimatorKind::Fit;
  } else {
    schema_error(root + ".estimator", "expected \"mle\" or \"fit\"");
  }
  c.n_particles = to_int(get_integer(j, "n_particles", root, c.n_particles), root + ".n_particles");
  c.m = to_int(get_integer(j, "m", root, c.m), root + ".m");
  c.n_rep = to_int(get_integer(j, "n_rep", root, c.n_rep), root + ".n_rep");
  c.theta_true = get_number(j, "theta_true", root, c.theta_true);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) schema_error(root + ".seed", "expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  c.bin_width = get_number(j, "bin_width", root, c.bin_width);

  if (j.contains("state")) {
    const Json& s = j.at("state");
    const std::string path = root + ".state";
    reject_unknown(s, path, {"kind", "value"});
    const std::string kind = get_string(s, "kind", path, "optimal");
    bool found = false;
    for (auto k : {StateSpec::Kind::Chi, StateSpec::Kind::XiPhi, StateSpec::Kind::Gaussian, StateSpec::Kind::Optimal,
                   StateSpec::Kind::OptimalNoisy, StateSpec::Kind::Coherent}) {
      if (kind == kind_name(k)) {
        c.state.kind = k;
        found = true;
      }
    }
    if (!found) schema_error(path + ".kind", "unknown state kind \"" + kind + "\"");
    const bool needs_value = c.state.kind == StateSpec::Kind::Chi || c.state.kind == StateSpec::Kind::XiPhi ||
                             c.state.kind == StateSpec::Kind::Gaussian;
    if (needs_value && !s.contains("value")) schema_error(path + ".value", "required for kind \"" + kind + "\"");
    c.state.value = get_number(s, "value", path, 0.0);
  }
  if (j.contains("wavepacket")) {
    const Json& w = j.at("wavepacket");
    reject_unknown(w, root + ".wavepacket", {"kappa_width"});
    c.kappa_width = get_number(w, "kappa_width", root + ".wavepacket", c.kappa_width);
  }
  if (j.contains("noise")) {
    const Json& n = j.at("noise");
    const std::string path = root + ".noise";
    reject_unknown(n, path, {"eta", "sigma_blur", "alpha"});
    c.noise.eta = get_number(n, "eta", path, 1.0);
    c.noise.sigma_blur = get_number(n, "sigma_blur", path, 0.0);
    if (n.contains("alpha") && !n.at("alpha").is_null()) c.noise.alpha = get_number(n, "alpha", path, 0.0);
  }
  return c;
}

Json config_to_json(const CampaignConfig& c) {
  Json j;
  j["protocol"] = c.protocol == Protocol::Pattern ? "pattern" : "mzi";
  j["estimator"] = c.estimator == EstimatorKind::Mle ? "mle" : "fit";
  j["n_particles"] = c.n_particles;
  j["m"] = c.m;
  j["n_rep"] = c.n_rep;
  j["theta_true"] = c.theta_true;
  j["seed"] = c.seed;
  j["state"] = {{"kind", kind_name(c.state.kind)}, {"value", c.state.value}};
  j["wavepacket"] = {{"kappa_width", c.kappa_width}};
  j["noise"] = {{"eta", c.noise.eta}, {"sigma_blur", c.noise.sigma_blur}};
  j["noise"]["alpha"] = c.noise.alpha ? Json(*c.noise.alpha) : Json(nullptr);
  j["bin_width"] = c.bin_width;
  return j;
}

Json stats_to_json(const SampleStats& s) {
  return Json{{"count", s.count},
              {"mean", s.mean},
              {"mean_stderr", s.mean_stderr},
              {"variance", s.variance},
              {"variance_stderr", s.variance_stderr}};
}

Json result_to_json(const CampaignResult& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = config_to_json(r.config);
  const auto& su = r.prepared.summary;
  j["state"] = {{"chi", std::isfinite(r.prepared.chi) ? Json(r.prepared.chi) : Json(nullptr)},
                {"xi_n", extended_to_json(su.xi_n)},
                {"xi_phi", extended_to_json(su.xi_phi)},
                {"visibility", su.visibility},
                {"qfi", su.qfi}};
  j["statistics"] = stats_to_json(r.inclusive);
  j["statistics_excluding_ambiguous"] = stats_to_json(r.exclusive);
  j["m_times_variance"] = r.inclusive.variance * r.config.m;
  j["prediction"] = {{"formula", r.prediction_formula}, {"variance", extended_to_json(r.predicted_variance)}};
  j["counters"] = {{"ambiguous", r.ambiguous_count},
                   {"floored_likelihood_points", r.floored_count},
                   {"clipped_counts", r.clipped_count},
                   {"empty_bins", r.empty_bin_count}};
  Json checks = Json::object();
  for (const auto& c : r.checks) checks[c.name] = c.passed;
  j["checks"] = checks;
  return j;
}

void write_estimates_csv(std::ostream& os, const CampaignResult& r) {
  os << "# schema_version=" << kSchemaVersion << '\n';
  os << "repetition,estimate,deviation,ambiguous\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < r.estimates.size(); ++i) {
    os << i << ',' << r.estimates[i] << ',' << wrap_angle(r.estimates[i] - r.config.theta_true) << ','
       << (r.ambiguous[i] ? 1 : 0) << '\n';
  }
}

}  // namespace obd

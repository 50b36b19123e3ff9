#include <doctest.h>

#include <sstream>

#include "obd/serialization.hpp"

using namespace obd;

TEST_CASE("state round trip") {
  const auto s = gaussian_phase_squeezed(6, 0.5);
  const auto back = state_from_json(Json::parse(state_to_json(s).dump()));
  REQUIRE(back.n_particles() == 6);
  for (std::size_t i = 0; i < 7; ++i) CHECK(back.amplitudes()[i] == s.amplitudes()[i]);
  CHECK_THROWS_AS(state_from_json(Json{{"n", 1}, {"re", {1.0}}, {"im", {0.0}}}), DomainError);
  CHECK_THROWS_AS(state_from_json(Json{{"n", 1}, {"re", {1.0, 0.0}}, {"im", {0.0, 0.0}}, {"x", 1}}), DomainError);
}

TEST_CASE("config round trip and defaults") {
  const auto defaults = config_from_json(Json::object());
  CHECK(defaults.n_particles == 100);
  CHECK(defaults.state.kind == StateSpec::Kind::Optimal);

  const auto j = Json::parse(R"({"protocol": "pattern", "estimator": "fit", "n_particles": 40, "m": 3,
    "n_rep": 10, "theta_true": 0.5, "seed": 99, "state": {"kind": "xi_phi", "value": 0.6},
    "wavepacket": {"kappa_width": 50}, "noise": {"eta": 0.9, "sigma_blur": 0.1, "alpha": 5},
    "bin_width": 0.1})");
  const auto c = config_from_json(j);
  CHECK(c.estimator == EstimatorKind::Fit);
  CHECK(c.seed == 99);
  CHECK(c.state.kind == StateSpec::Kind::XiPhi);
  CHECK(c.noise.alpha.value() == 5.0);
  CHECK(c.kappa_width == 50.0);
  CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));
}

TEST_CASE("schema errors name the key path") {
  auto message = [](const char* text) {
    try {
      config_from_json(Json::parse(text));
    } catch (const DomainError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"bogus": 1})") == "config.bogus: unknown key");
  CHECK(message(R"({"noise": {"eta": "high"}})") == "config.noise.eta: expected a number");
  CHECK(message(R"({"state": {"kind": "chi"}})") == "config.state.value: required for kind \"chi\"");
  CHECK(message(R"({"m": 2.5})") == "config.m: expected an integer");
  CHECK(message(R"({"protocol": "sagnac"})").starts_with("config.protocol"));
}

TEST_CASE("extended values") {
  CHECK(extended_to_json(ExtendedReal::infinity()) == "inf");
  CHECK(extended_to_json(ExtendedReal::undefined()) == "undefined");
  CHECK(extended_to_json(ExtendedReal::finite(0.5)) == 0.5);
}

TEST_CASE("estimates csv") {
  CampaignResult r{.config = {}, .prepared = {ground_state(2, 0.0), 0.0, {}, {}}};
  r.estimates = {0.1, -0.2};
  r.ambiguous = {false, true};
  std::ostringstream os;
  write_estimates_csv(os, r);
  CHECK(os.str().find("repetition,estimate,deviation,ambiguous\n0,") != std::string::npos);
  CHECK(os.str().find(",1\n") != std::string::npos);
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "obd/position_sampler.hpp"
#include "obd/quadrature.hpp"
#include "oracles.hpp"

using namespace obd;

namespace {

const WavePacket kWp = WavePacket::dimensionless();

TwoModeState state_from(const std::vector<Complex>& c) {
  return TwoModeState(static_cast<int>(c.size()) - 1, Amplitudes(c.begin(), c.end()));
}

double phase_of(double x, double theta) {
  const double p = std::fmod(x + theta, 2.0 * std::numbers::pi);
  return p < 0.0 ? p + 2.0 * std::numbers::pi : p;
}

}  // namespace

TEST_CASE("seed paths give reproducible independent streams") {
  Rng a = make_rng({7, 1, 2});
  Rng b = make_rng({7, 1, 2});
  Rng c = make_rng({7, 1, 3});
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
}

TEST_CASE("field operator") {
  SUBCASE("single particle in mode a") {
    ReducedState s;
    s.amplitudes = {0.0, 1.0};
    s.remaining = 1;
    for (double x : {-3.0, 0.0, 5.5}) {
      const auto r = apply_field_operator(s, x, 0.4, kWp);
      REQUIRE(r.amplitudes.size() == 1);
      CHECK(std::norm(r.amplitudes[0]) == doctest::Approx(envelope_density(x, kWp)));
      const Complex expected = std::sqrt(envelope_density(x, kWp)) * std::polar(1.0, 0.5 * (x + 0.4));
      CHECK(std::abs(r.amplitudes[0] - expected) < 1e-15);
    }
  }
  SUBCASE("twin Fock joint weight equals the oracle") {
    const std::vector<Complex> twin{0.0, 1.0, 0.0};
    const oracle::FirstQuantized fq{2, twin, kWp, 0.7};
    const auto s = ReducedState::from(state_from(twin));
    for (double x1 : {-1.0, 0.2, 3.3}) {
      for (double x2 : {0.0, 1.1, -7.0}) {
        const auto r = apply_field_operator(apply_field_operator(s, x1, 0.7, kWp), x2, 0.7, kWp);
        // |<0|Psi(x2)Psi(x1)|psi>|^2 = N(N-1) p2
        CHECK(r.norm2() == doctest::Approx(2.0 * fq.p2(x1, x2)).epsilon(1e-10));
      }
    }
  }
  SUBCASE("particle-counting sum rule") {
    std::mt19937_64 rng(1);
    const int n = 6;
    const auto s = ReducedState::from(state_from(oracle::random_state(n, rng)));
    const double half = kWp.domain_half_width();
    const double total =
        integrate_panels([&](double x) { return apply_field_operator(s, x, 0.2, kWp).norm2(); }, -half, half, 480, 1e-12)
            .value;
    CHECK(total == doctest::Approx(n * s.norm2()).epsilon(1e-9));
  }
  SUBCASE("empty state") {
    ReducedState s;
    s.amplitudes = {1.0};
    CHECK_THROWS_AS(apply_field_operator(s, 0.0, 0.0, kWp), DomainError);
  }
}

TEST_CASE("sampler grid") {
  const PatternSampler s(kWp);
  CHECK(s.grid_points() >= 4096);
  CHECK((s.grid_points() & (s.grid_points() - 1)) == 0);
  const double per_fringe = s.grid_points() / (2 * kWp.domain_half_width() / kWp.fringe_period());
  CHECK(per_fringe >= 64.0);
}

TEST_CASE("shots stay in the domain and are reproducible") {
  const auto state = ground_state(20, -0.05);
  const PatternSampler sampler(kWp);
  Rng a = make_rng({1, 0, 0});
  Rng b = make_rng({1, 0, 0});
  const Shot s1 = sampler.sample(state, 0.5, a);
  const Shot s2 = sampler.sample(state, 0.5 + 2 * std::numbers::pi, b);
  REQUIRE(s1.positions.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(std::abs(s1.positions[i]) <= kWp.domain_half_width());
    CHECK(s1.positions[i] == doctest::Approx(s2.positions[i]).epsilon(1e-9));
  }
}

TEST_CASE("coherent state positions follow p1") {
  const int n = 10;
  const double theta = 0.9;
  const auto state = ground_state(n, 0.0);
  const PatternDensity model(moments(state), n, kWp, theta);
  const PatternSampler sampler(kWp);
  Rng rng = make_rng({2, 0, 0});
  std::vector<double> xs;
  std::vector<double> phase_counts(16, 0.0);
  for (int shot = 0; shot < 10000; ++shot) {
    for (double x : sampler.sample(state, theta, rng).positions) {
      xs.push_back(x);
      phase_counts[static_cast<std::size_t>(phase_of(x, theta) / (2 * std::numbers::pi) * 16)] += 1.0;
    }
  }
  // Fringe phase density (1 + cos p) / 2 pi.
  std::vector<double> probs;
  for (int k = 0; k < 16; ++k) {
    const double a = 2 * std::numbers::pi * k / 16, b = 2 * std::numbers::pi * (k + 1) / 16;
    probs.push_back((b - a + std::sin(b) - std::sin(a)) / (2 * std::numbers::pi));
  }
  CHECK(oracle::chi_square_test(phase_counts, probs) > 0.01);
  const oracle::P1Cdf cdf(model);
  std::vector<double> subset(xs.begin(), xs.begin() + 20000);
  CHECK(oracle::ks_one_sample(subset, cdf) > 0.01);
}

TEST_CASE("joint statistics of small states") {
  std::mt19937_64 gen(31);
  const PatternSampler sampler(kWp);
  for (int n : {2, 3}) {
    const auto c = oracle::random_state(n, gen, true);
    const auto state = state_from(c);
    const double theta = -0.4;
    const PatternDensity model(moments(state), n, kWp, theta);
    const auto sep = model.separable();
    constexpr int kBins = 6;
    std::vector<double> joint(kBins * kBins, 0.0);
    std::vector<double> first, second;
    Rng rng = make_rng({3, static_cast<std::uint64_t>(n), 0});
    for (int shot = 0; shot < 20000; ++shot) {
      const auto pos = sampler.sample(state, theta, rng).positions;
      const auto b1 = static_cast<std::size_t>(phase_of(pos[0], theta) / (2 * std::numbers::pi) * kBins);
      const auto b2 = static_cast<std::size_t>(phase_of(pos[1], theta) / (2 * std::numbers::pi) * kBins);
      joint[b1 * kBins + b2] += 1.0;
      first.push_back(pos[0]);
      second.push_back(pos[1]);
    }
    // Integrate the fringe-phase form of p2 over each pair of phase bins.
    auto cell = [&](double a, double b) {
      return std::array<double, 3>{b - a, std::sin(b) - std::sin(a), std::cos(a) - std::cos(b)};
    };
    std::vector<double> probs;
    for (int i = 0; i < kBins; ++i) {
      for (int j = 0; j < kBins; ++j) {
        const double w = 2 * std::numbers::pi / kBins;
        const auto u = cell(i * w, (i + 1) * w);
        const auto v = cell(j * w, (j + 1) * w);
        const double mass = u[0] * v[0] + sep.visibility * (u[1] * v[0] + u[0] * v[1]) + sep.cc * u[1] * v[1] +
                            sep.ss * u[2] * v[2];
        probs.push_back(mass / (4 * std::numbers::pi * std::numbers::pi));
      }
    }
    CHECK(oracle::chi_square_test(joint, probs) > 0.01);
    CHECK(oracle::ks_two_sample(first, second) > 0.01);
  }
}

TEST_CASE("twin Fock pair distance") {
  // Fringe-phase difference of the two particles of |1,1>.
  const auto state = TwoModeState(2, Amplitudes{0.0, 1.0, 0.0});
  const PatternDensity model(moments(state), 2, kWp, 0.0);
  const auto sep = model.separable();
  REQUIRE(sep.cc == doctest::Approx(sep.ss));
  const PatternSampler sampler(kWp);
  Rng rng = make_rng({4, 0, 0});
  constexpr int kBins = 8;
  std::vector<double> counts(kBins, 0.0);
  for (int shot = 0; shot < 20000; ++shot) {
    const auto pos = sampler.sample(state, 0.0, rng).positions;
    counts[static_cast<std::size_t>(phase_of(pos[0] - pos[1], 0.0) / (2 * std::numbers::pi) * kBins)] += 1.0;
  }
  // Density of d = p1 - p2 mod 2 pi: (1 + cc cos d) / 2 pi.
  std::vector<double> probs;
  for (int k = 0; k < kBins; ++k) {
    const double a = 2 * std::numbers::pi * k / kBins, b = 2 * std::numbers::pi * (k + 1) / kBins;
    probs.push_back((b - a + sep.cc * (std::sin(b) - std::sin(a))) / (2 * std::numbers::pi));
  }
  CHECK(oracle::chi_square_test(counts, probs) > 0.01);
}

TEST_CASE("MZI sampler matches the discrete tables") {
  const int n = 8;
  const auto state = ground_state(n, -0.1);
  const auto m = moments(state);
  for (double theta : {0.0, 0.6, -1.1}) {
    const auto t = mzi_densities(theta, m, n);
    Rng rng = make_rng({5, 0, 0});
    double na = 0.0, total = 0.0, pairs_aa = 0.0, pairs = 0.0;
    for (int shot = 0; shot < 20000; ++shot) {
      const auto c = sample_mzi_shot(state, theta, rng);
      CHECK(c.arm_a + c.arm_b == n);
      na += c.arm_a;
      total += n;
      pairs_aa += c.arm_a * (c.arm_a - 1.0);
      pairs += n * (n - 1.0);
    }
    const double p = t.p1[0];
    CHECK(std::abs(na / total - p) < 5 * std::sqrt(p * (1 - p) * n / total) + 1e-3);
    CHECK(pairs_aa / pairs == doctest::Approx(t.p2[0][0]).epsilon(0.03).scale(0.01));
  }
}

TEST_CASE("binned sampling") {
  const auto state = ground_state(10, 0.0);
  const PatternDensity model(moments(state), 10, kWp, 0.3);
  const BinSpec bins = BinSpec::covering(kWp.domain_half_width(), 0.2);
  CHECK(bins.count == 4800);
  Rng rng = make_rng({6, 0, 0});
  const int m = 2000;
  const auto counts = sample_binned(state, kWp, 0.3, bins, m, rng);
  double total = 0.0;
  for (double v : counts.mean) total += v;
  CHECK(total == doctest::Approx(10.0).epsilon(1e-12));
  // Coherent state: independent particles, so counts are binomial and nearly Poissonian.
  int outliers = 0;
  double var_ratio = 0.0, mean_sum = 0.0;
  for (std::size_t k = 0; k < bins.count; ++k) {
    const double mu = 0.2 * 10 * model.p1(bins.center(k));
    if (mu < 0.01) continue;
    if (std::abs(counts.mean[k] - mu) > 4 * std::sqrt(mu / m)) ++outliers;
    var_ratio += counts.variance[k];
    mean_sum += counts.mean[k];
  }
  CHECK(outliers < 5);
  CHECK(var_ratio / mean_sum == doctest::Approx(1.0).epsilon(0.05));
  CHECK_THROWS_AS(sample_binned(state, kWp, 0.3, BinSpec::covering(kWp.domain_half_width(), 0.5), 1, rng),
                  DomainError);
}

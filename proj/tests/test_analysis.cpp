#include "covsched/analysis.hpp"

#include <doctest.h>

#include "covsched/errors.hpp"
#include "test_util.hpp"

using namespace covsched;
using namespace covsched::testutil;

TEST_CASE("stationary_distribution") {
  SUBCASE("t = 3, lambda = 0.8") {
    const ThresholdChainResult r = stationary_distribution(3, 0.8);
    CHECK(r.pi[0] == doctest::Approx(0.8 / 3.4).epsilon(1e-12));
    for (int j = 1; j <= 3; ++j) CHECK(r.pi[j] == doctest::Approx(r.pi[0]));
    CHECK(r.pi[4] == doctest::Approx(0.2 * r.pi[0]));
    CHECK(r.pi[5] == doctest::Approx(0.04 * r.pi[0]));
  }
  SUBCASE("t = 0, lambda = 1 concentrates at the origin") {
    const ThresholdChainResult r = stationary_distribution(0, 1.0);
    CHECK(r.pi[0] == doctest::Approx(1.0));
    CHECK(r.pi[1] == 0.0);
    CHECK(r.tail_mass == 0.0);
  }
  SUBCASE("normalization holds exactly for random (t, lambda)") {
    RngStream rng(31, 0, 90);
    for (int trial = 0; trial < 20; ++trial) {
      const int t = static_cast<int>(rng.uniform01() * 10);
      const double lambda = rng.uniform(0.05, 0.999);
      const ThresholdChainResult r = stationary_distribution(t, lambda, 128);
      double total = r.tail_mass;
      for (double p : r.pi) total += p;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("lambda = 0 has no recurrence") {
    CHECK_THROWS_AS(stationary_distribution(2, 0.0), ConfigError);
  }
}

TEST_CASE("expected_energy") {
  CHECK(expected_energy(3, 0.8, 1.0) == doctest::Approx(1.0 / 3.4).epsilon(1e-12));
  CHECK(expected_energy(0, 0.8, 2.5) == doctest::Approx(2.5));
  // Chain-theoretic route: E times the transmitting-state mass over lambda.
  const ThresholdChainResult r = stationary_distribution(3, 0.8, 256);
  double tx_mass = r.pi[0];  // reaching hop 0 costs one transmission
  for (std::size_t j = 4; j < r.pi.size(); ++j) tx_mass += r.pi[j];
  tx_mass += r.tail_mass;
  CHECK(expected_energy(3, 0.8, 1.0) == doctest::Approx(tx_mass / 0.8).epsilon(1e-9));
}

TEST_CASE("expected_covariance") {
  const SystemModel m = study_model();
  const SteadyStateFilter ss = dare_steady_state(m, study_sensor());
  SUBCASE("lambda = 1, t = 0 is exactly tr Pbar") {
    const CovSeriesResult r = expected_covariance(0, 1.0, m, ss);
    CHECK(r.value == doctest::Approx(ss.post_cov.trace()).epsilon(1e-12));
  }
  SUBCASE("series value against a long partial sum") {
    const CovSeriesResult r = expected_covariance(3, 0.8, m, ss, 1e-10);
    double direct = 0.0;
    Matrix P = ss.post_cov;
    const double pi0 = 0.8 / 3.4;
    for (int j = 0; j < 200; ++j) {
      const double pij = j <= 3 ? pi0 : std::pow(0.2, j - 3) * pi0;
      direct += pij * P.trace();
      P = f_map(P, m);
    }
    CHECK(r.value == doctest::Approx(direct).epsilon(1e-8));
  }
  SUBCASE("value grows with the threshold") {
    double prev = 0.0;
    for (int t = 0; t <= 6; ++t) {
      const double v = expected_covariance(t, 0.8, m, ss).value;
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }
  SUBCASE("divergent series is rejected") {
    CHECK_THROWS_AS(expected_covariance(3, 0.2, m, ss), PreconditionError);
  }
}

TEST_CASE("tradeoff_curve on the single-sensor study") {
  const SystemModel m = study_model();
  const SensorModel s = study_sensor();
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) grid.push_back(0.02 + (0.98 - 0.02) * i / 19.0);
  const auto curve = tradeoff_curve(m, s, grid, 20);
  REQUIRE(curve.size() == 20);
  // Threshold index is nonincreasing in beta and reaches zero.
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].t <= curve[i - 1].t);
  CHECK(curve.back().t == 0);
  // Pareto consistency along the sweep: more energy, less covariance.
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].energy > curve[i - 1].energy + 1e-12)
      CHECK(curve[i].cov_trace <= curve[i - 1].cov_trace + 1e-9);
  }
  // Near-one beta transmits always.
  const auto one = tradeoff_curve(m, s, {0.999}, 20);
  CHECK(one[0].t == 0);
}

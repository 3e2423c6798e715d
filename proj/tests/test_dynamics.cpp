#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "optocool/dynamics.hpp"
#include "optocool/error.hpp"

using namespace optocool;

TEST_CASE("distribution construction") {
  CHECK_THROWS_AS(PhononDistribution({1.0}), ValidationError);
  CHECK_THROWS_AS(PhononDistribution({1.1, -0.1}), ValidationError);
  CHECK_THROWS_AS(PhononDistribution({0.5, 0.4}), ValidationError);
  CHECK_THROWS_AS(PhononDistribution::fock(4, 3), ValidationError);
  const auto f = PhononDistribution::fock(2, 5);
  CHECK(f.truncation() == 5);
  CHECK(f.mean() == 2.0);
  CHECK(f.total() == 1.0);
  CHECK(f.total_variation(PhononDistribution::fock(3, 5)) == 1.0);
  // tiny negative round-off is clipped
  const PhononDistribution clipped({1.0 + 1e-13, -1e-13});
  CHECK(clipped[1] == 0.0);
}

TEST_CASE("pure decay from the first excited level") {
  const auto run = evolve_populations({0.0, 1.0}, PhononDistribution::fock(1, 10), 1.0, 0.005);
  CHECK(run.final_state.mean() == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
  CHECK(std::abs(run.final_state.mean() - std::exp(-1.0)) < 1e-6);
}

TEST_CASE("symmetric chain drifts linearly") {
  const PhononRates rates{0.5, 0.5};
  const auto run = evolve_populations(rates, PhononDistribution::fock(0, 200), 2.0, 4e-4);
  CHECK(run.final_state.mean() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mean_phonon_trajectory(rates, 0.0, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("stationary distribution is geometric") {
  const auto st = stationary_distribution({1.0, 2.0}, 60);
  for (int m = 0; m < 10; ++m) CHECK(st.distribution[m] == doctest::Approx(std::pow(0.5, m + 1)).epsilon(1e-12));
  CHECK(st.closed_form_mean == 1.0);
  CHECK(st.truncated_mean == doctest::Approx(1.0).epsilon(1e-12));

  const auto ground = stationary_distribution({0.0, 1.0}, 5);
  CHECK(ground.distribution[0] == 1.0);
  CHECK(ground.truncated_mean == 0.0);

  CHECK_THROWS_AS(stationary_distribution({1.0, 1.0}, 10), NoStationaryState);
  CHECK_THROWS_AS(stationary_distribution({2.0, 1.0}, 10), NoStationaryState);
}

TEST_CASE("stationary mean at the optimal cooling point") {
  SystemParams p;
  p.g = 2.0;
  p.kappa = 7.0;
  p.gamma = 0.05;
  p.chi = 0.1;
  p.omega_drive = 1.0;
  p.delta_atom = 1.0;
  p.delta_cav = optimal_detuning(p);
  const RateSet r = transition_rates(p);
  int levels = 1;
  while (stationary_distribution(PhononRates(r), levels).distribution.top_fraction() >= kTruncationTolerance) ++levels;
  const auto st = stationary_distribution(PhononRates(r), levels);
  CHECK(std::abs(st.truncated_mean - *r.m_inf) < 1e-6);
  CHECK(st.closed_form_mean == *r.m_inf);
}

TEST_CASE("first moment matches the closed form") {
  const PhononRates rates{0.3, 1.0};
  const auto run = evolve_populations(rates, PhononDistribution::fock(5, 60), 2.0, 1e-3);
  CHECK(std::abs(run.final_state.mean() - mean_phonon_trajectory(rates, 5.0, 2.0)) < 1e-5);
  CHECK(mean_phonon_trajectory(rates, 5.0, 0.0) == 5.0);
  CHECK(mean_phonon_trajectory(rates, 5.0, 1e4) == doctest::Approx(0.3 / 0.7).epsilon(1e-12));
}

TEST_CASE("probability conservation and monotone relaxation") {
  const PhononRates rates{0.3, 1.0};
  const auto run = evolve_populations(rates, PhononDistribution::fock(5, 40), 20.0, 1e-3, EvolveOptions{100});
  REQUIRE(run.samples.size() > 10);
  double previous = run.samples.front().mean;
  for (const auto& s : run.samples) {
    double total = 0.0;
    for (double v : s.populations) total += v;
    CHECK(std::abs(total - 1.0) <= 1e-9 * std::max(1.0, s.t));
    CHECK(s.mean <= previous + 1e-12);
    CHECK(s.mean >= 0.3 / 0.7 - 1e-12);
    previous = s.mean;
  }
}

TEST_CASE("long runs reach the stationary distribution") {
  const PhononRates rates{0.3, 1.0};
  const auto run = evolve_populations(rates, PhononDistribution::fock(5, 50), 80.0, 1.5e-3);
  const auto st = stationary_distribution(rates, 50);
  CHECK(run.final_state.total_variation(st.distribution) < 1e-6);
  CHECK(run.warnings.empty());
}

TEST_CASE("preconditions and warnings") {
  const auto init = PhononDistribution::fock(1, 10);
  CHECK_THROWS_AS(evolve_populations({0.3, 1.0}, init, 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(evolve_populations({0.3, 1.0}, init, 1.0, 0.01), ValidationError);  // 0.01*10*1.3 = 0.13
  CHECK_THROWS_AS(evolve_populations({-0.3, 1.0}, init, 1.0, 0.001), ValidationError);
  CHECK_NOTHROW(evolve_populations({0.3, 1.0}, init, 1.0, 0.007));

  const auto heated = evolve_populations({1.0, 0.5}, PhononDistribution::fock(3, 5), 5.0, 0.005);
  REQUIRE(heated.warnings.size() == 1);
  CHECK(heated.warnings[0].find("truncation") != std::string::npos);
}

TEST_CASE("trajectory output") {
  const auto run = evolve_populations({0.3, 1.0}, PhononDistribution::fock(1, 3), 0.5, 0.01, EvolveOptions{25});
  CHECK(run.samples.size() == 3);
  std::ostringstream out;
  write_trajectory_csv(out, run.samples);
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "t,mean_m,p_0,p_1,p_2,p_3");
  std::getline(in, row);
  CHECK(row.rfind("0.00000000000e+00,1.00000000000e+00,", 0) == 0);
}

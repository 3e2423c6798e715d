#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "optocool/error.hpp"
#include "optocool/oracle.hpp"
#include "optocool/rates.hpp"

using namespace optocool;
using namespace optocool::oracle;

namespace {

SystemParams weak_point() {
  SystemParams p;
  p.g = 2.0;
  p.kappa = 7.0;
  p.gamma = 0.05;
  p.chi = 0.02;
  p.omega_drive = 0.1;
  p.delta_cav = 0.0;
  p.delta_atom = 1.0;
  return p;
}

Matrix random_density(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix x(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) x(i, j) = Complex(n(rng), n(rng));
  Matrix rho = x * x.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("truncation limits") {
  Truncation t;
  CHECK(t.dim() == 90);
  CHECK_NOTHROW(t.check());
  CHECK(t.enlarged().n_cav_max == 3);
  CHECK(t.enlarged().n_mech_max == 18);
  t.n_mech_max = 100;
  CHECK_THROWS_AS(t.check(), ValidationError);
  t.max_dim = 1000;
  CHECK_NOTHROW(t.check());
  t.n_cav_max = 0;
  CHECK_THROWS_AS(t.check(), ValidationError);
}

TEST_CASE("operator algebra") {
  const Truncation t{2, 4};
  const auto ops = OperatorSet::build(t);
  const Matrix ca = ops.a * ops.a_dag - ops.a_dag * ops.a - ops.identity;
  const Matrix cb = ops.b * ops.b_dag - ops.b_dag * ops.b - ops.identity;
  for (int atom = 0; atom < 2; ++atom)
    for (int n = 0; n <= t.n_cav_max; ++n)
      for (int m = 0; m <= t.n_mech_max; ++m) {
        const int i = ops.index(atom, n, m);
        if (n < t.n_cav_max) CHECK(std::abs(ca(i, i)) < 1e-14);
        if (m < t.n_mech_max) CHECK(std::abs(cb(i, i)) < 1e-14);
      }
  CHECK(ca.cwiseAbs().maxCoeff() > 1.0);  // cutoff artifact on the top level
  CHECK((ops.sigma_minus * ops.sigma_plus + ops.sigma_plus * ops.sigma_minus - ops.identity).norm() == 0.0);
  CHECK((ops.a_dag - ops.a.adjoint()).norm() == 0.0);
  // a |g, 2, 1> = sqrt(2) |g, 1, 1>
  CHECK(ops.a(ops.index(0, 1, 1), ops.index(0, 2, 1)).real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  // sigma- = |g><e|
  CHECK(ops.sigma_minus(ops.index(0, 0, 0), ops.index(1, 0, 0)).real() == 1.0);
}

TEST_CASE("hamiltonian is hermitian") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 10; ++i) {
    SystemParams p = weak_point();
    p.delta_cav = u(rng);
    p.delta_atom = u(rng);
    p.chi = std::abs(u(rng));
    p.pump = i % 2 ? PumpScheme::Atom : PumpScheme::Cavity;
    const Matrix h = build_hamiltonian(p, Truncation{2, 5});
    CHECK((h - h.adjoint()).norm() == 0.0);
  }
}

TEST_CASE("uncoupled hamiltonian is diagonal on the occupation grid") {
  SystemParams p;
  p.delta_cav = 0.3;
  p.delta_atom = -1.7;
  const Truncation t{2, 3};
  const auto ops = OperatorSet::build(t);
  const Matrix h = build_hamiltonian(p, ops);
  CHECK((h - Matrix(h.diagonal().asDiagonal())).norm() == 0.0);
  for (int e = 0; e < 2; ++e)
    for (int n = 0; n <= 2; ++n)
      for (int m = 0; m <= 3; ++m)
        CHECK(h(ops.index(e, n, m), ops.index(e, n, m)).real() ==
              doctest::Approx(m + 0.5 - p.delta_atom * e - p.delta_cav * n).epsilon(1e-15));
}

TEST_CASE("single-excitation blocks reproduce the dressed spectrum") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> det(-5.0, 5.0);
  std::uniform_real_distribution<double> cpl(0.0, 4.0);
  const Truncation t{1, 2};
  const auto ops = OperatorSet::build(t);
  for (int trial = 0; trial < 50; ++trial) {
    SystemParams p;
    p.g = cpl(rng);
    p.delta_cav = det(rng);
    p.delta_atom = det(rng);
    const Matrix h = build_hamiltonian(p, ops);
    const DressedSpectrum ds = dressed_spectrum(p);
    for (int m = 0; m <= t.n_mech_max; ++m) {
      const int ie = ops.index(1, 0, m);
      const int ic = ops.index(0, 1, m);
      Eigen::Matrix2cd block;
      block << h(ie, ie), h(ie, ic), h(ic, ie), h(ic, ic);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
      CHECK(std::abs(es.eigenvalues()(1) - (ds.omega_plus + m + 0.5)) < 1e-10);
      CHECK(std::abs(es.eigenvalues()(0) - (ds.omega_minus + m + 0.5)) < 1e-10);
      // the block is closed under H
      for (int k = 0; k < h.rows(); ++k) {
        if (k == ie || k == ic) continue;
        CHECK(std::abs(h(k, ie)) == 0.0);
        CHECK(std::abs(h(k, ic)) == 0.0);
      }
    }
  }
}

TEST_CASE("master equation generator") {
  const Truncation t{2, 3};
  const auto ops = OperatorSet::build(t);
  SystemParams p = weak_point();
  p.omega_drive = 0.0;
  CHECK(lindblad_rhs(p, std::nullopt, ops, QuantumState::ground(t)).norm() == 0.0);
  CHECK(lindblad_rhs(p, std::nullopt, ops, QuantumState::ground(t, 1)).norm() == 0.0);
  CHECK(lindblad_rhs(p, ThermalEnv{0.0, 0.1}, ops, QuantumState::ground(t, 1)).norm() > 0.0);

  std::mt19937_64 rng(53);
  p = weak_point();
  p.chi = 0.3;
  p.omega_drive = 0.7;
  const ThermalEnv env{1.5, 0.2};
  const Lindbladian l(p, env, ops);
  const SparseMatrix super = l.superoperator();
  for (int i = 0; i < 5; ++i) {
    const QuantumState rho(t, random_density(t.dim(), rng));
    const Matrix d = l.apply(rho.rho());
    CHECK(std::abs(d.trace()) < 1e-10);
    CHECK((d - d.adjoint()).norm() < 1e-12);
    CHECK((lindblad_rhs(p, env, ops, rho) - d).norm() == 0.0);
    const Vector v = super * vectorize(rho.rho());
    CHECK((unvectorize(v, t.dim()) - d).norm() < 1e-12 * std::max(1.0, d.norm()));
  }
}

TEST_CASE("quantum state checks") {
  const Truncation t{1, 2};
  CHECK_NOTHROW(QuantumState::ground(t).check());
  CHECK_NOTHROW(QuantumState::thermal(t, 0.4).check());
  Matrix bad = QuantumState::ground(t).rho() * 2.0;
  CHECK_THROWS_AS(QuantumState(t, bad).check(), NumericalError);
  CHECK_THROWS_AS(QuantumState(Truncation{1, 3}, bad), ValidationError);
  const auto obs = observables(QuantumState::basis(t, 1, 1, 2));
  CHECK(obs.n_cav == 1.0);
  CHECK(obs.n_mech == 2.0);
  CHECK(obs.p_excited == 1.0);
}

TEST_CASE("spontaneous emission and cavity loss") {
  const Truncation t{1, 1};
  SystemParams p;
  p.kappa = 0.8;
  p.gamma = 0.3;
  EvolveOptions opts;
  opts.sample_every = 50;
  opts.check_positivity = true;
  const auto atom = evolve(p, std::nullopt, t, QuantumState::basis(t, 1, 0, 0), 5.0, 0.002, opts);
  for (const auto& s : atom.series) CHECK(std::abs(s.obs.p_excited - std::exp(-0.3 * s.t)) < 1e-6);
  const auto cav = evolve(p, std::nullopt, t, QuantumState::basis(t, 0, 1, 0), 2.0, 0.002, opts);
  for (const auto& s : cav.series) CHECK(std::abs(s.obs.n_cav - std::exp(-1.6 * s.t)) < 1e-6);
  CHECK(atom.max_trace_drift < 1e-8);
  CHECK(atom.max_hermiticity_error < 1e-10);
  CHECK(atom.min_eigenvalue > -1e-7);
}

TEST_CASE("explicit and implicit integrators agree") {
  const Truncation t{2, 4};
  SystemParams p = weak_point();
  p.chi = 0.2;
  p.omega_drive = 1.0;
  EvolveOptions rk;
  rk.sample_every = 100;
  EvolveOptions im = rk;
  im.integrator = Integrator::ImplicitSdirk;
  const auto a = evolve(p, std::nullopt, t, QuantumState::ground(t, 2), 2.0, 0.001, rk);
  const auto b = evolve(p, std::nullopt, t, QuantumState::ground(t, 2), 2.0, 0.001, im);
  CHECK((a.final_state.rho() - b.final_state.rho()).norm() < 1e-5);
}

TEST_CASE("oversized steps are halved") {
  const Truncation t{1, 1};
  SystemParams p;
  p.kappa = 50.0;
  const auto run = evolve(p, std::nullopt, t, QuantumState::basis(t, 0, 1, 0), 1.0, 0.2);
  CHECK(run.dt_used < 0.2);
  CHECK(run.final_state.trace() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("undriven steady state is the bath state") {
  const Truncation t{1, 12};
  SystemParams p = weak_point();
  p.omega_drive = 0.0;
  const ThermalEnv env{0.7, 0.05};
  REQUIRE(has_unique_steady_state(p, env));
  const auto ss = steady_state(p, env, t);
  CHECK((ss.state.rho() - QuantumState::thermal(t, 0.7).rho()).norm() < 1e-8);
  CHECK(ss.residual < 1e-8);
  CHECK_FALSE(has_unique_steady_state(p, std::nullopt));
}

TEST_CASE("steady state methods agree") {
  const Truncation t{1, 6};
  SystemParams p = weak_point();
  p.chi = 0.1;
  p.omega_drive = 0.5;
  const ThermalEnv env{0.5, 0.05};
  SteadyStateOptions lin, imp;
  lin.method = SteadyStateMethod::LinearSolve;
  imp.method = SteadyStateMethod::ImplicitEvolution;
  const auto a = steady_state(p, env, t, lin);
  const auto b = steady_state(p, env, t, imp);
  CHECK(a.method_used == SteadyStateMethod::LinearSolve);
  CHECK(b.method_used == SteadyStateMethod::ImplicitEvolution);
  CHECK(std::abs(a.obs.n_mech - b.obs.n_mech) < 1e-8);
  CHECK(std::abs(a.obs.n_cav - b.obs.n_cav) < 1e-10);
  CHECK_NOTHROW(a.state.check(1e-9, 1e-12, 1e-9));
}

TEST_CASE("weak-drive steady occupation at the optimal detuning") {
  SystemParams p = weak_point();
  p.delta_cav = optimal_detuning(p);
  const auto ss = steady_state(p, std::nullopt, Truncation{});
  const RateSet r = transition_rates(p);
  CHECK(std::abs(ss.obs.n_mech - *r.m_inf) / *r.m_inf < 0.10);
  CHECK(std::abs(ss.obs.n_cav - r.s2) / r.s2 < 0.05);
  CHECK(ss.residual < 1e-8);
}

TEST_CASE("steady-state deviation shrinks with the coupling") {
  SystemParams p = weak_point();
  double previous = INFINITY;
  for (double chi : {0.04, 0.02, 0.01}) {
    p.chi = chi;
    const auto ss = steady_state(p, std::nullopt, Truncation{});
    const double m = *transition_rates(p).m_inf;
    const double dev = std::abs(ss.obs.n_mech - m) / m;
    CHECK(dev < previous);
    previous = dev;
  }
}

TEST_CASE("fitted cooling rate converges with the coupling") {
  SystemParams p = weak_point();
  double previous = INFINITY;
  for (double chi : {0.04, 0.02, 0.01}) {
    p.chi = chi;
    const auto ss = steady_state(p, std::nullopt, Truncation{});
    const auto run = measure_cooling(p, std::nullopt, Truncation{}, {}, ss.obs.n_mech);
    const double gamma = transition_rates(p).gamma_cool;
    CHECK_FALSE(run.fit.flagged);
    const double dev = std::abs(run.fit.gamma - gamma) / gamma;
    CHECK(dev < 0.10);
    CHECK(dev < previous);
    previous = dev;
  }
}

TEST_CASE("summary output") {
  const Truncation t{1, 2};
  SystemParams p;
  p.kappa = 1.0;
  p.gamma = 0.1;
  const auto ss = steady_state(p, ThermalEnv{0.2, 0.1}, t);
  std::ostringstream out;
  write_summary(out, ss);
  CHECK(out.str().find("n_mech = ") != std::string::npos);
  CHECK(out.str().find("dim = 12\n") != std::string::npos);
  std::ostringstream csv;
  write_series_csv(csv, {Sample{0.0, {}}});
  CHECK(csv.str().rfind("t,n_cav,n_mech,p_excited\n", 0) == 0);
}

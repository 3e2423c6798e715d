#include "optocool/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include "optocool/csv.hpp"
#include "optocool/error.hpp"

namespace optocool::oracle {

namespace {

constexpr Complex kI{0.0, 1.0};

Matrix ladder(int levels) {
  Matrix m = Matrix::Zero(levels, levels);
  for (int n = 1; n < levels; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
  return m;
}

Matrix kron3(const Matrix& atom, const Matrix& cavity, const Matrix& mech) {
  return Eigen::kroneckerProduct(atom, Eigen::kroneckerProduct(cavity, mech).eval()).eval();
}

struct BasisLabel {
  int atom, photons, phonons;
};

BasisLabel label(const Truncation& t, int i) {
  const int mech = t.mech_levels();
  const int cav = t.cavity_levels();
  return {i / (cav * mech), (i / mech) % cav, i % mech};
}

}  // namespace

// ---------------------------------------------------------------------------

void Truncation::check() const {
  if (n_cav_max < 1 || n_mech_max < 1) throw ValidationError("Fock cutoffs must be >= 1");
  if (dim() > max_dim) {
    std::ostringstream msg;
    msg << "Hilbert-space dimension " << dim() << " exceeds the limit " << max_dim;
    throw ValidationError(msg.str());
  }
}

Truncation Truncation::enlarged() const {
  Truncation t = *this;
  t.n_cav_max += 1;
  t.n_mech_max += 4;
  return t;
}

OperatorSet OperatorSet::build(const Truncation& trunc) {
  trunc.check();
  const Matrix id_atom = Matrix::Identity(2, 2);
  const Matrix id_cav = Matrix::Identity(trunc.cavity_levels(), trunc.cavity_levels());
  const Matrix id_mech = Matrix::Identity(trunc.mech_levels(), trunc.mech_levels());
  Matrix lower = Matrix::Zero(2, 2);
  lower(0, 1) = 1.0;  // |g><e|

  OperatorSet ops;
  ops.trunc = trunc;
  ops.a = kron3(id_atom, ladder(trunc.cavity_levels()), id_mech);
  ops.a_dag = ops.a.adjoint();
  ops.b = kron3(id_atom, id_cav, ladder(trunc.mech_levels()));
  ops.b_dag = ops.b.adjoint();
  ops.sigma_minus = kron3(lower, id_cav, id_mech);
  ops.sigma_plus = ops.sigma_minus.adjoint();
  ops.identity = Matrix::Identity(trunc.dim(), trunc.dim());
  return ops;
}

int OperatorSet::index(int atom, int photons, int phonons) const {
  return (atom * trunc.cavity_levels() + photons) * trunc.mech_levels() + phonons;
}

// ---------------------------------------------------------------------------

QuantumState::QuantumState(const Truncation& trunc, Matrix rho) : trunc_(trunc), rho_(std::move(rho)) {
  if (rho_.rows() != trunc_.dim() || rho_.cols() != trunc_.dim())
    throw ValidationError("density matrix dimension does not match the truncation");
}

QuantumState QuantumState::basis(const Truncation& trunc, int atom, int photons, int phonons) {
  trunc.check();
  if (atom < 0 || atom > 1 || photons < 0 || photons > trunc.n_cav_max || phonons < 0 || phonons > trunc.n_mech_max)
    throw ValidationError("basis state outside the truncated space");
  Matrix rho = Matrix::Zero(trunc.dim(), trunc.dim());
  const int i = (atom * trunc.cavity_levels() + photons) * trunc.mech_levels() + phonons;
  rho(i, i) = 1.0;
  return QuantumState(trunc, std::move(rho));
}

QuantumState QuantumState::ground(const Truncation& trunc, int phonons) { return basis(trunc, 0, 0, phonons); }

QuantumState QuantumState::thermal(const Truncation& trunc, double m_th) {
  trunc.check();
  if (!(m_th >= 0.0)) throw ValidationError("m_th must be non-negative");
  const double ratio = m_th / (m_th + 1.0);
  std::vector<double> p(static_cast<std::size_t>(trunc.mech_levels()));
  double w = 1.0, norm = 0.0;
  for (double& v : p) {
    v = w;
    norm += w;
    w *= ratio;
  }
  Matrix rho = Matrix::Zero(trunc.dim(), trunc.dim());
  for (int m = 0; m < trunc.mech_levels(); ++m) rho(m, m) = p[static_cast<std::size_t>(m)] / norm;
  return QuantumState(trunc, std::move(rho));
}

double QuantumState::trace() const { return rho_.trace().real(); }

double QuantumState::hermiticity_error() const { return (rho_ - rho_.adjoint()).norm(); }

double QuantumState::min_eigenvalue() const {
  const Matrix herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void QuantumState::check(double trace_tol, double hermitian_tol, double eigen_tol) const {
  std::ostringstream msg;
  if (std::abs(trace() - 1.0) > trace_tol) msg << "trace " << trace() << " != 1; ";
  if (hermiticity_error() > hermitian_tol) msg << "hermiticity error " << hermiticity_error() << "; ";
  if (const double e = min_eigenvalue(); e < -eigen_tol) msg << "negative eigenvalue " << e << "; ";
  if (!msg.str().empty()) throw NumericalError("invalid density matrix: " + msg.str());
}

Observables observables(const QuantumState& state) {
  const Truncation& t = state.truncation();
  Observables o;
  for (int i = 0; i < t.dim(); ++i) {
    const double p = state.rho()(i, i).real();
    const auto l = label(t, i);
    o.n_cav += l.photons * p;
    o.n_mech += l.phonons * p;
    o.p_excited += l.atom * p;
  }
  return o;
}

// ---------------------------------------------------------------------------

Matrix build_hamiltonian(const SystemParams& p, const OperatorSet& ops) {
  const Matrix n_photon = ops.a_dag * ops.a;
  const Matrix position = ops.b + ops.b_dag;
  Matrix h = ops.b_dag * ops.b + 0.5 * ops.identity;
  h -= p.delta_atom * (ops.sigma_plus * ops.sigma_minus);
  h -= p.delta_cav * n_photon;
  h += p.g * (ops.sigma_plus * ops.a + ops.sigma_minus * ops.a_dag);
  h -= p.chi * (n_photon * position);
  const Matrix& drive = p.pump == PumpScheme::Cavity ? ops.a : ops.sigma_minus;
  h += 0.5 * p.omega_drive * (drive + drive.adjoint());
  return h;
}

Matrix build_hamiltonian(const SystemParams& p, const Truncation& trunc) {
  return build_hamiltonian(p, OperatorSet::build(trunc));
}

Lindbladian::Lindbladian(const SystemParams& p, const std::optional<ThermalEnv>& env, const OperatorSet& ops)
    : hamiltonian_(build_hamiltonian(p, ops)) {
  auto add = [&](double rate, const Matrix& op) {
    if (rate > 0.0) channels_.push_back({rate, op});
  };
  add(2.0 * p.kappa, ops.a);
  add(p.gamma, ops.sigma_minus);
  if (env) {
    env->check();
    add(env->gamma_th * (env->m_th + 1.0), ops.b);
    add(env->gamma_th * env->m_th, ops.b_dag);
  }
  effective_ = hamiltonian_;
  for (const auto& c : channels_) effective_ -= 0.5 * kI * c.rate * (c.op.adjoint() * c.op);
}

Matrix Lindbladian::apply(const Matrix& rho) const {
  Matrix out = -kI * (effective_ * rho - rho * effective_.adjoint());
  for (const auto& c : channels_) out.noalias() += c.rate * (c.op * rho * c.op.adjoint());
  return out;
}

SparseMatrix Lindbladian::superoperator() const {
  const int n = dim();
  SparseMatrix id(n, n);
  id.setIdentity();
  const SparseMatrix heff = effective_.sparseView();
  const SparseMatrix heff_conj = Matrix(effective_.conjugate()).sparseView();

  // vec(A X B) = (B^T kron A) vec(X)
  SparseMatrix l = Eigen::kroneckerProduct(id, heff);
  l = (-kI) * l;
  SparseMatrix right = Eigen::kroneckerProduct(heff_conj, id);
  l += kI * right;
  for (const auto& c : channels_) {
    const SparseMatrix op = c.op.sparseView();
    const SparseMatrix op_conj = Matrix(c.op.conjugate()).sparseView();
    SparseMatrix jump = Eigen::kroneckerProduct(op_conj, op);
    l += c.rate * jump;
  }
  l.makeCompressed();
  return l;
}

Matrix lindblad_rhs(const SystemParams& params, const std::optional<ThermalEnv>& env, const OperatorSet& ops,
                    const QuantumState& rho) {
  return Lindbladian(params, env, ops).apply(rho.rho());
}

Vector vectorize(const Matrix& rho) { return Eigen::Map<const Vector>(rho.data(), rho.size()); }

Matrix unvectorize(const Vector& v, int dim) { return Eigen::Map<const Matrix>(v.data(), dim, dim); }

// ---------------------------------------------------------------------------

namespace {

using SparseLu = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

SparseMatrix shifted_identity(const SparseMatrix& l, double scale) {
  SparseMatrix id(l.rows(), l.cols());
  id.setIdentity();
  SparseMatrix a = id - scale * l;
  a.makeCompressed();
  return a;
}

void factorize(SparseLu& lu, const SparseMatrix& a) {
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) throw NumericalError("sparse LU factorization failed: " + lu.lastErrorMessage());
}

Observables observables_of(const Vector& x, const Truncation& t) {
  const int n = t.dim();
  Observables o;
  for (int i = 0; i < n; ++i) {
    const double p = x(static_cast<Eigen::Index>(i) * n + i).real();
    const auto l = label(t, i);
    o.n_cav += l.photons * p;
    o.n_mech += l.phonons * p;
    o.p_excited += l.atom * p;
  }
  return o;
}

double trace_of(const Vector& x, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += x(static_cast<Eigen::Index>(i) * n + i).real();
  return s;
}

double top_mech_population(const Vector& x, const Truncation& t) {
  const int n = t.dim();
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    if (label(t, i).phonons == t.n_mech_max) s += x(static_cast<Eigen::Index>(i) * n + i).real();
  return s;
}

/// Two-stage, stiffly accurate, L-stable SDIRK (Alexander). Both stages share
/// the matrix I - c h L, so one factorization serves a whole fixed-step run.
class SdirkStepper {
 public:
  SdirkStepper(const SparseMatrix& l, double h) : l_(l), h_(h) { factorize(lu_, shifted_identity(l, kC * h)); }

  Vector step(const Vector& x) const {
    const Vector k1 = lu_.solve(Vector(l_ * x));
    const Vector k2 = lu_.solve(Vector(l_ * Vector(x + h_ * (1.0 - kC) * k1)));
    return x + h_ * ((1.0 - kC) * k1 + kC * k2);
  }

 private:
  static constexpr double kC = 1.0 - 0.70710678118654752440;
  const SparseMatrix& l_;
  double h_;
  SparseLu lu_;
};

double relative_change(const Observables& a, const Observables& b) {
  auto rel = [](double x, double y) {
    const double scale = std::max({std::abs(x), std::abs(y), 1e-300});
    return std::abs(x - y) / scale;
  };
  // Observables that vanish identically (e.g. n_cav without drive) do not
  // constrain convergence.
  double worst = 0.0;
  for (auto [x, y] : {std::pair{a.n_cav, b.n_cav}, {a.n_mech, b.n_mech}, {a.p_excited, b.p_excited}})
    if (std::max(std::abs(x), std::abs(y)) > 1e-300) worst = std::max(worst, rel(x, y));
  return worst;
}

}  // namespace

Evolution evolve(const SystemParams& params, const std::optional<ThermalEnv>& env, const Truncation& trunc,
                 const QuantumState& rho0, double t_final, double dt, const EvolveOptions& options) {
  trunc.check();
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(t_final >= 0.0)) throw ValidationError("t_final must be non-negative");
  if (rho0.truncation().dim() != trunc.dim()) throw ValidationError("initial state has the wrong dimension");
  const int every = std::max(options.sample_every, 1);
  const OperatorSet ops = OperatorSet::build(trunc);
  const Lindbladian gen(params, env, ops);
  const int n = trunc.dim();

  if (options.integrator == Integrator::ImplicitSdirk) {
    const auto steps = static_cast<long long>(std::ceil(t_final / dt - 1e-9));
    const double h = steps > 0 ? t_final / static_cast<double>(steps) : dt;
    const SparseMatrix l = gen.superoperator();
    const SdirkStepper stepper(l, h);
    Vector x = vectorize(rho0.rho());
    Evolution out{rho0, {{0.0, observables(rho0)}}, h, 0.0, rho0.hermiticity_error(), 0.0};
    if (options.check_positivity) out.min_eigenvalue = rho0.min_eigenvalue();
    for (long long s = 1; s <= steps; ++s) {
      x = stepper.step(x);
      const double drift = std::abs(trace_of(x, n) - 1.0);
      out.max_trace_drift = std::max(out.max_trace_drift, drift);
      if (drift > options.trace_tolerance || !x.allFinite()) {
        std::ostringstream msg;
        msg << "trace drift " << drift << " at t = " << static_cast<double>(s) * h;
        throw NumericalError(msg.str());
      }
      if (s % every == 0 || s == steps) {
        const QuantumState st(trunc, unvectorize(x, n));
        out.series.push_back({static_cast<double>(s) * h, observables(st)});
        out.max_hermiticity_error = std::max(out.max_hermiticity_error, st.hermiticity_error());
        if (options.check_positivity) out.min_eigenvalue = std::min(out.min_eigenvalue, st.min_eigenvalue());
      }
    }
    out.final_state = QuantumState(trunc, unvectorize(x, n));
    return out;
  }

  double step = dt;
  for (int attempt = 0; attempt <= options.max_halvings; ++attempt, step *= 0.5) {
    const auto steps = static_cast<long long>(std::ceil(t_final / step - 1e-9));
    const double h = steps > 0 ? t_final / static_cast<double>(steps) : step;
    Matrix rho = rho0.rho();
    Evolution out{rho0, {{0.0, observables(rho0)}}, h, 0.0, rho0.hermiticity_error(), 0.0};
    if (options.check_positivity) out.min_eigenvalue = rho0.min_eigenvalue();
    bool diverged = false;
    for (long long s = 1; s <= steps; ++s) {
      const Matrix k1 = gen.apply(rho);
      const Matrix k2 = gen.apply(rho + 0.5 * h * k1);
      const Matrix k3 = gen.apply(rho + 0.5 * h * k2);
      const Matrix k4 = gen.apply(rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

      // A physical state has Frobenius norm <= 1; growth beyond it means the
      // explicit step is outside its stability region.
      if (!rho.allFinite() || rho.norm() > 1.0 + 1e-6) {
        diverged = true;
        break;
      }
      const double drift = std::abs(rho.trace().real() - 1.0);
      out.max_trace_drift = std::max(out.max_trace_drift, drift);
      if (drift > options.trace_tolerance) {
        std::ostringstream msg;
        msg << "trace drift " << drift << " exceeds " << options.trace_tolerance << " at t = "
            << static_cast<double>(s) * h;
        throw NumericalError(msg.str());
      }
      if (s % every == 0 || s == steps) {
        const QuantumState st(trunc, rho);
        out.series.push_back({static_cast<double>(s) * h, observables(st)});
        out.max_hermiticity_error = std::max(out.max_hermiticity_error, st.hermiticity_error());
        if (options.check_positivity) out.min_eigenvalue = std::min(out.min_eigenvalue, st.min_eigenvalue());
      }
    }
    if (diverged) continue;
    out.final_state = QuantumState(trunc, std::move(rho));
    return out;
  }
  throw NumericalError("explicit integration diverged even after halving dt");
}

// ---------------------------------------------------------------------------

bool has_unique_steady_state(const SystemParams& p, const std::optional<ThermalEnv>& env) {
  const bool optical_unique = (p.kappa > 0.0 || p.gamma > 0.0) && (p.g > 0.0 || (p.kappa > 0.0 && p.gamma > 0.0));
  const bool bath = env && env->gamma_th > 0.0;
  const bool drives_mechanics =
      p.chi > 0.0 && p.omega_drive > 0.0 && p.kappa + p.gamma > 0.0 && (p.pump == PumpScheme::Cavity || p.g > 0.0);
  return optical_unique && (bath || drives_mechanics);
}

std::string_view to_string(SteadyStateMethod method) {
  switch (method) {
    case SteadyStateMethod::Auto:
      return "auto";
    case SteadyStateMethod::LinearSolve:
      return "linear-solve";
    case SteadyStateMethod::ImplicitEvolution:
      return "implicit-evolution";
    case SteadyStateMethod::TimeEvolution:
      return "time-evolution";
  }
  return "unknown";
}

namespace {

QuantumState normalized(const Truncation& trunc, Matrix rho) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const double tr = rho.trace().real();
  if (!(std::abs(tr) > 0.0) || !std::isfinite(tr)) throw NumericalError("steady state has vanishing trace");
  rho /= tr;
  return QuantumState(trunc, std::move(rho));
}

SteadyState finish(const Truncation& trunc, const SparseMatrix& l, Matrix rho, int steps, SteadyStateMethod method) {
  QuantumState st = normalized(trunc, std::move(rho));
  const double residual = (l * vectorize(st.rho())).norm();
  Observables obs = observables(st);
  return SteadyState{std::move(st), obs, residual, steps, method};
}

}  // namespace

SteadyState steady_state(const SystemParams& params, const std::optional<ThermalEnv>& env, const Truncation& trunc,
                         const SteadyStateOptions& options) {
  trunc.check();
  const OperatorSet ops = OperatorSet::build(trunc);
  const Lindbladian gen(params, env, ops);
  const SparseMatrix l = gen.superoperator();
  const int n = trunc.dim();

  SteadyStateMethod method = options.method;
  if (method == SteadyStateMethod::Auto)
    method = has_unique_steady_state(params, env) ? SteadyStateMethod::LinearSolve
                                                  : SteadyStateMethod::ImplicitEvolution;

  const QuantumState initial = options.initial ? *options.initial
                               : env             ? QuantumState::thermal(trunc, env->m_th)
                                                 : QuantumState::ground(trunc);
  if (initial.truncation().dim() != n) throw ValidationError("initial state has the wrong dimension");

  auto check_residual = [&](const SteadyState& ss) {
    if (!(ss.residual <= options.residual_tolerance)) {
      std::ostringstream msg;
      msg << "steady state not converged: residual " << ss.residual << " > " << options.residual_tolerance;
      throw NumericalError(msg.str());
    }
    return ss;
  };

  switch (method) {
    case SteadyStateMethod::LinearSolve: {
      // Replace the (redundant) equation for rho_00 by the trace condition.
      const auto nn = static_cast<Eigen::Index>(n) * n;
      std::vector<Eigen::Triplet<Complex>> triplets;
      triplets.reserve(static_cast<std::size_t>(l.nonZeros()) + static_cast<std::size_t>(n));
      for (Eigen::Index col = 0; col < l.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(l, col); it; ++it)
          if (it.row() != 0) triplets.emplace_back(it.row(), it.col(), it.value());
      for (int i = 0; i < n; ++i) triplets.emplace_back(0, static_cast<Eigen::Index>(i) * n + i, 1.0);
      SparseMatrix a(nn, nn);
      a.setFromTriplets(triplets.begin(), triplets.end());
      a.makeCompressed();
      SparseLu lu;
      factorize(lu, a);
      Vector rhs = Vector::Zero(nn);
      rhs(0) = 1.0;
      const Vector x = lu.solve(rhs);
      if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalError("steady-state linear solve failed");
      return check_residual(finish(trunc, l, unvectorize(x, n), 1, method));
    }

    case SteadyStateMethod::ImplicitEvolution: {
      Vector x = vectorize(initial.rho());
      Observables prev = observables_of(x, trunc);
      constexpr double kGrowth = 10.0;
      constexpr double kMaxStep = 1e14;
      double h = 1.0;
      double factored = 0.0;
      SparseLu lu;
      for (int s = 1; s <= options.max_steps; ++s) {
        if (h != factored) {
          factorize(lu, shifted_identity(l, h));
          factored = h;
        }
        x = lu.solve(x);
        x /= trace_of(x, n);
        const Observables cur = observables_of(x, trunc);
        const double change = relative_change(prev, cur);
        prev = cur;
        const double residual = (l * x).norm();
        if (change < options.change_tolerance && residual < options.residual_tolerance)
          return finish(trunc, l, unvectorize(x, n), s, method);
        h = std::min(h * kGrowth, kMaxStep);
      }
      throw NumericalError("implicit steady-state iteration did not converge within the step budget");
    }

    case SteadyStateMethod::TimeEvolution: {
      const double period = 2.0 * M_PI;
      Matrix rho = initial.rho();
      Observables prev = observables(initial);
      double t = 0.0;
      int periods = 0;
      EvolveOptions eo;
      eo.sample_every = std::numeric_limits<int>::max();
      while (t < options.max_time) {
        Evolution ev = evolve(params, env, trunc, QuantumState(trunc, rho), period, options.rk4_dt, eo);
        rho = ev.final_state.rho();
        t += period;
        ++periods;
        const Observables cur = observables(ev.final_state);
        const double change = relative_change(prev, cur);
        prev = cur;
        const double residual = gen.apply(rho).norm();
        if (change < options.change_tolerance && residual < options.residual_tolerance)
          return finish(trunc, l, std::move(rho), periods, method);
      }
      throw NumericalError("time evolution did not reach a steady state within max_time");
    }

    case SteadyStateMethod::Auto:
      break;
  }
  throw NumericalError("unreachable steady-state method");
}

// ---------------------------------------------------------------------------

CoolingRun measure_cooling(const SystemParams& params, const std::optional<ThermalEnv>& env, const Truncation& trunc,
                           const CoolingOptions& options, std::optional<double> steady_n_mech) {
  trunc.check();
  const int n = trunc.dim();
  const OperatorSet ops = OperatorSet::build(trunc);
  const SparseMatrix l = Lindbladian(params, env, ops).superoperator();
  const Vector x0 = vectorize(QuantumState::ground(trunc, options.initial_phonons).rho());

  // Let the optical degrees of freedom settle, then read off the drift of <b^dagger b>.
  double slow_optical = std::numeric_limits<double>::infinity();
  if (params.kappa > 0.0) slow_optical = std::min(slow_optical, params.kappa);
  if (params.gamma > 0.0) slow_optical = std::min(slow_optical, 0.5 * params.gamma);
  if (!std::isfinite(slow_optical)) throw ValidationError("cooling measurement needs kappa > 0 or gamma > 0");
  const double settle = 20.0 / slow_optical;
  SparseLu lu;
  factorize(lu, shifted_identity(l, settle));
  Vector xq = x0;
  for (int i = 0; i < 3; ++i) xq = lu.solve(xq);
  const double m_q = observables_of(xq, trunc).n_mech;
  const double slope = observables_of(Vector(l * xq), trunc).n_mech;

  double rate = 0.0;
  if (steady_n_mech && slope < 0.0 && m_q > *steady_n_mech)
    rate = -slope / (m_q - *steady_n_mech);
  else
    rate = std::abs(slope) / std::max(m_q, 1.0);
  if (!(rate > 0.0) || !std::isfinite(rate)) throw NumericalError("no mechanical dynamics to measure");

  CoolingRun run;
  run.gamma_estimate = rate;
  run.step = options.step_fraction / rate;
  const bool cooling = slope < 0.0;
  const double t_stop = options.efoldings / rate;
  const double m_stop = options.heating_growth * options.initial_phonons;

  const SdirkStepper stepper(l, run.step);
  Vector x = x0;
  run.series.push_back({0.0, observables_of(x, trunc)});
  for (int s = 1; s <= options.max_steps; ++s) {
    x = stepper.step(x);
    const double t = static_cast<double>(s) * run.step;
    const Observables obs = observables_of(x, trunc);
    if (std::abs(trace_of(x, n) - 1.0) > 1e-8 || !x.allFinite())
      throw NumericalError("trace drift during the cooling run");
    run.series.push_back({t, obs});
    if (cooling && t >= t_stop) break;
    if (!cooling && (obs.n_mech >= m_stop || top_mech_population(x, trunc) > options.top_level_limit)) break;
  }
  run.fit = fit_cooling_rate(run.series);
  return run;
}

// ---------------------------------------------------------------------------

void write_series_csv(std::ostream& out, const std::vector<Sample>& series) {
  out << "t,n_cav,n_mech,p_excited\n";
  for (const auto& s : series)
    out << format_number(s.t) << ',' << format_number(s.obs.n_cav) << ',' << format_number(s.obs.n_mech) << ','
        << format_number(s.obs.p_excited) << '\n';
}

void write_summary(std::ostream& out, const SteadyState& ss) {
  const Truncation& t = ss.state.truncation();
  out << "method = " << to_string(ss.method_used) << '\n'
      << "n_cav_max = " << t.n_cav_max << '\n'
      << "n_mech_max = " << t.n_mech_max << '\n'
      << "dim = " << t.dim() << '\n'
      << "n_cav = " << format_number(ss.obs.n_cav) << '\n'
      << "n_mech = " << format_number(ss.obs.n_mech) << '\n'
      << "p_excited = " << format_number(ss.obs.p_excited) << '\n'
      << "trace = " << format_number(ss.state.trace()) << '\n'
      << "residual = " << format_number(ss.residual) << '\n'
      << "steps = " << ss.steps << '\n';
}

}  // namespace optocool::oracle

#pragma once

// Brute-force master-equation verifier: the full atom + cavity + mechanics
// Hamiltonian on a truncated Fock space with Lindblad dissipators.
//
// Tensor ordering is atom (slowest) x cavity x mechanics (fastest); the atom
// basis is {|g>, |e>} in that order. Density matrices are vectorized column
// by column for the superoperator form.

#include <complex>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "optocool/params.hpp"
#include "optocool/rates.hpp"

namespace optocool::oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

struct Truncation {
  int n_cav_max = 2;
  int n_mech_max = 14;
  int max_dim = 512;

  int cavity_levels() const { return n_cav_max + 1; }
  int mech_levels() const { return n_mech_max + 1; }
  int dim() const { return 2 * cavity_levels() * mech_levels(); }
  /// Throws ValidationError for cutoffs below 1 or dim() > max_dim.
  void check() const;
  /// Cutoff used by the independence check: one more photon, four more phonons.
  Truncation enlarged() const;
};

/// Ladder and projector operators of the composite space, built once per run.
struct OperatorSet {
  Truncation trunc;
  Matrix a, a_dag;
  Matrix b, b_dag;
  Matrix sigma_minus, sigma_plus;  ///< |g><e| and |e><g|
  Matrix identity;

  static OperatorSet build(const Truncation& trunc);

  /// Basis index of |atom, photons, phonons> (atom: 0 = g, 1 = e).
  int index(int atom, int photons, int phonons) const;
};

/// Density matrix tagged with its truncation.
class QuantumState {
 public:
  QuantumState() = default;
  QuantumState(const Truncation& trunc, Matrix rho);

  /// |g, 0> (x) |phonons><phonons|.
  static QuantumState ground(const Truncation& trunc, int phonons = 0);
  static QuantumState basis(const Truncation& trunc, int atom, int photons, int phonons);
  /// |g, 0> (x) thermal state of occupation m_th (renormalized on the ladder).
  static QuantumState thermal(const Truncation& trunc, double m_th);

  const Truncation& truncation() const { return trunc_; }
  const Matrix& rho() const { return rho_; }

  double trace() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
  /// Throws NumericalError unless trace == 1, rho == rho^dagger and rho >= 0
  /// within the given tolerances.
  void check(double trace_tol = 1e-9, double hermitian_tol = 1e-12, double eigen_tol = 1e-9) const;

 private:
  Truncation trunc_;
  Matrix rho_;
};

struct Observables {
  double n_cav = 0.0;      ///< <a^dagger a>
  double n_mech = 0.0;     ///< <b^dagger b>
  double p_excited = 0.0;  ///< <sigma+ sigma->
};

Observables observables(const QuantumState& state);

/// H/hbar in the laser frame. Hermitian by construction.
Matrix build_hamiltonian(const SystemParams& params, const OperatorSet& ops);
Matrix build_hamiltonian(const SystemParams& params, const Truncation& trunc);

/// Master-equation generator: coherent part plus cavity loss (2 kappa),
/// spontaneous emission (gamma) and an optional mechanical thermal bath.
class Lindbladian {
 public:
  Lindbladian(const SystemParams& params, const std::optional<ThermalEnv>& env, const OperatorSet& ops);

  const Matrix& hamiltonian() const { return hamiltonian_; }
  int dim() const { return static_cast<int>(hamiltonian_.rows()); }

  /// d rho / dt from dense matrix products.
  Matrix apply(const Matrix& rho) const;
  /// Sparse superoperator acting on the column-stacked density matrix.
  SparseMatrix superoperator() const;

 private:
  struct Channel {
    double rate;
    Matrix op;
  };
  Matrix hamiltonian_;
  Matrix effective_;  ///< H - (i/2) sum rate c^dagger c
  std::vector<Channel> channels_;
};

/// Convenience wrapper around Lindbladian::apply.
Matrix lindblad_rhs(const SystemParams& params, const std::optional<ThermalEnv>& env, const OperatorSet& ops,
                    const QuantumState& rho);

Vector vectorize(const Matrix& rho);
Matrix unvectorize(const Vector& v, int dim);

// ---------------------------------------------------------------------------
// Time evolution

enum class Integrator {
  RungeKutta4,   ///< explicit, dense matrix products
  ImplicitSdirk  ///< L-stable two-stage SDIRK on the sparse superoperator
};

struct EvolveOptions {
  Integrator integrator = Integrator::RungeKutta4;
  int sample_every = 1;
  double trace_tolerance = 1e-8;
  int max_halvings = 6;         ///< dt halvings allowed when RK4 diverges
  bool check_positivity = false;
};

struct Sample {
  double t = 0.0;
  Observables obs;
};

struct Evolution {
  QuantumState final_state;
  std::vector<Sample> series;
  double dt_used = 0.0;
  double max_trace_drift = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;  ///< only tracked with check_positivity
};

/// Throws NumericalError on trace drift beyond tolerance or divergence.
Evolution evolve(const SystemParams& params, const std::optional<ThermalEnv>& env, const Truncation& trunc,
                 const QuantumState& rho0, double t_final, double dt, const EvolveOptions& options = {});

// ---------------------------------------------------------------------------
// Steady state

enum class SteadyStateMethod {
  Auto,               ///< linear solve if the stationary state is unique, implicit evolution otherwise
  LinearSolve,        ///< sparse LU on the generator with a trace row
  ImplicitEvolution,  ///< backward-Euler steps of geometrically growing size
  TimeEvolution       ///< explicit RK4 until observables settle
};

struct SteadyStateOptions {
  SteadyStateMethod method = SteadyStateMethod::Auto;
  double residual_tolerance = 1e-8;
  double change_tolerance = 1e-9;
  int max_steps = 60;                ///< implicit steps
  double max_time = 1e5;             ///< explicit evolution budget
  double rk4_dt = 0.01;
  std::optional<QuantumState> initial;  ///< default: ground state (thermal with a bath)
};

struct SteadyState {
  QuantumState state;
  Observables obs;
  double residual = 0.0;  ///< Frobenius norm of the generator applied to rho_ss
  int steps = 0;
  SteadyStateMethod method_used = SteadyStateMethod::LinearSolve;
};

/// True when the generator has a single stationary state (mechanics damped
/// by a bath or coupled to a driven, decaying optical system).
bool has_unique_steady_state(const SystemParams& params, const std::optional<ThermalEnv>& env);

SteadyState steady_state(const SystemParams& params, const std::optional<ThermalEnv>& env, const Truncation& trunc,
                         const SteadyStateOptions& options = {});

// ---------------------------------------------------------------------------
// Cooling-rate extraction

struct FitResult {
  double gamma = 0.0;      ///< fitted exponential rate (NaN when indeterminate)
  double m_inf = 0.0;      ///< fitted asymptote
  double amplitude = 0.0;  ///< m(t0) - m_inf of the fitted model
  double residual = 0.0;   ///< RMS residual over the series range
  bool flagged = false;
  std::string reason;
};

struct FitOptions {
  double residual_threshold = 1e-3;
};

/// Least-squares fit of m(t) = m_inf + (m0 - m_inf) exp(-Gamma (t - t0)).
FitResult fit_cooling_rate(std::span<const double> t, std::span<const double> m, const FitOptions& options = {});
FitResult fit_cooling_rate(const std::vector<Sample>& series, const FitOptions& options = {});

struct CoolingOptions {
  int initial_phonons = 3;
  double step_fraction = 0.05;  ///< implicit step in units of the estimated 1/|Gamma|
  double efoldings = 4.0;       ///< cooling runs cover this many estimated e-folds
  double heating_growth = 2.0;  ///< heating runs stop once <m> exceeds this multiple of m0
  double top_level_limit = 1e-3;
  int max_steps = 4000;
};

struct CoolingRun {
  std::vector<Sample> series;
  FitResult fit;
  double gamma_estimate = 0.0;  ///< time-scale probe used to size the steps
  double step = 0.0;
};

/// Evolves |g,0> (x) |m0> with the implicit integrator on the cooling time
/// scale and fits the phonon number. `steady_n_mech` (optional) sharpens the
/// initial rate estimate.
CoolingRun measure_cooling(const SystemParams& params, const std::optional<ThermalEnv>& env, const Truncation& trunc,
                           const CoolingOptions& options = {}, std::optional<double> steady_n_mech = std::nullopt);

// ---------------------------------------------------------------------------
// Output

/// CSV with columns t, n_cav, n_mech, p_excited.
void write_series_csv(std::ostream& out, const std::vector<Sample>& series);
/// Flat "key = value" block.
void write_summary(std::ostream& out, const SteadyState& ss);

std::string_view to_string(SteadyStateMethod method);

}  // namespace optocool::oracle

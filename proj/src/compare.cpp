#include "optocool/compare.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "optocool/csv.hpp"

namespace optocool {

namespace {

double relative_error(double measured, double reference) {
  return std::abs(measured - reference) / std::abs(reference);
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

Comparison compare_point(const SystemParams& params, const std::optional<ThermalEnv>& env,
                         const CompareOptions& options) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  validate(params);

  Comparison c;
  c.params = params;
  c.env = env;
  c.analytic = transition_rates(params);
  c.gamma_analytic = c.analytic.gamma_cool;
  c.m_analytic = c.analytic.m_inf;
  if (env) {
    const ThermalRates th = thermal_rates(c.analytic, *env);
    c.gamma_analytic = th.gamma_cool;
    c.m_analytic = th.m_inf;
  }

  c.steady = oracle::steady_state(params, env, options.trunc);
  c.rel_err_m = c.m_analytic ? relative_error(c.steady.obs.n_mech, *c.m_analytic) : nan;
  c.rel_err_s2 = c.analytic.s2 > 0.0 ? relative_error(c.steady.obs.n_cav, c.analytic.s2) : nan;

  c.gamma_fit = nan;
  c.rel_err_gamma = nan;
  if (options.fit_rate) {
    c.cooling = oracle::measure_cooling(params, env, options.trunc, options.cooling, c.steady.obs.n_mech);
    c.gamma_fit = c.cooling->fit.gamma;
    c.rel_err_gamma = relative_error(c.gamma_fit, c.gamma_analytic);
    c.sign_agrees = sign(c.gamma_fit) == sign(c.gamma_analytic);
  }

  c.cutoff_change = nan;
  if (options.check_cutoff && c.m_analytic) {
    const oracle::SteadyState big = oracle::steady_state(params, env, options.trunc.enlarged());
    c.cutoff_change = std::max(relative_error(big.obs.n_mech, c.steady.obs.n_mech),
                               relative_error(big.obs.n_cav, c.steady.obs.n_cav));
    c.cutoff_ok = c.cutoff_change < options.cutoff_tolerance;
  }

  c.pass = c.sign_agrees && c.cutoff_ok;
  if (c.m_analytic) {
    c.pass = c.pass && c.rel_err_m < options.tolerance;
    if (options.fit_rate) c.pass = c.pass && c.rel_err_gamma < options.tolerance;
  }
  return c;
}

void write_report(std::ostream& out, const Comparison& c) {
  const auto& p = c.params;
  out << "g = " << format_number(p.g) << '\n'
      << "kappa = " << format_number(p.kappa) << '\n'
      << "gamma = " << format_number(p.gamma) << '\n'
      << "chi = " << format_number(p.chi) << '\n'
      << "omega_drive = " << format_number(p.omega_drive) << '\n'
      << "delta_cav = " << format_number(p.delta_cav) << '\n'
      << "delta_atom = " << format_number(p.delta_atom) << '\n'
      << "pump = " << to_string(p.pump) << '\n';
  if (c.env)
    out << "m_th = " << format_number(c.env->m_th) << '\n' << "gamma_th = " << format_number(c.env->gamma_th) << '\n';
  const auto& t = c.steady.state.truncation();
  out << "n_cav_max = " << t.n_cav_max << '\n'
      << "n_mech_max = " << t.n_mech_max << '\n'
      << "s2_analytic = " << format_number(c.analytic.s2) << '\n'
      << "n_cav_oracle = " << format_number(c.steady.obs.n_cav) << '\n'
      << "rel_err_s2 = " << format_number(c.rel_err_s2) << '\n'
      << "gamma_analytic = " << format_number(c.gamma_analytic) << '\n'
      << "gamma_fit = " << format_number(c.gamma_fit) << '\n'
      << "rel_err_gamma = " << format_number(c.rel_err_gamma) << '\n'
      << "m_inf_analytic = " << format_number(c.m_analytic ? *c.m_analytic : -1.0) << '\n'
      << "n_mech_oracle = " << format_number(c.steady.obs.n_mech) << '\n'
      << "rel_err_m = " << format_number(c.rel_err_m) << '\n'
      << "cutoff_change = " << format_number(c.cutoff_change) << '\n'
      << "sign_agrees = " << (c.sign_agrees ? "true" : "false") << '\n';
  if (c.cooling) {
    out << "fit_residual = " << format_number(c.cooling->fit.residual) << '\n'
        << "fit_flagged = " << (c.cooling->fit.flagged ? "true" : "false") << '\n';
    if (c.cooling->fit.flagged) out << "fit_reason = " << c.cooling->fit.reason << '\n';
  }
  out << "pass = " << (c.pass ? "true" : "false") << '\n';
}

}  // namespace optocool

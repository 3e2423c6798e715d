#include "optocool/cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "optocool/compare.hpp"
#include "optocool/csv.hpp"
#include "optocool/dynamics.hpp"
#include "optocool/error.hpp"
#include "optocool/oracle.hpp"
#include "optocool/rates.hpp"
#include "optocool/sweep.hpp"

namespace optocool::cli {

namespace {

struct Common {
  std::string config;
  std::map<std::string, std::string> overrides;  // key -> raw text, only flags that were given
  std::string out = "-";
  int threads = 1;
  long long seed = 0;
  double eta_max = kDefaultEtaMax;
  std::optional<double> m_th;
  std::optional<double> gamma_th;
};

struct AxisFlags {
  Axis axis;
  void add(CLI::App* cmd, const std::string& name, double min, double max, int count) {
    axis = {min, max, count};
    cmd->add_option("--" + name + "_min", axis.min, name + " axis start")->capture_default_str();
    cmd->add_option("--" + name + "_max", axis.max, name + " axis end")->capture_default_str();
    cmd->add_option("--" + name + "_count", axis.count, name + " axis points")->capture_default_str();
  }
};

SystemParams resolve_params(const Common& c, std::ostream& err) {
  ConfigMap config;
  if (!c.config.empty()) config = load_config(c.config);
  for (const auto& [key, value] : c.overrides) config[key] = value;
  const SystemParams p = apply_config(config);
  for (const auto& w : validate(p, c.eta_max)) err << "warning: " << w.message << '\n';
  return p;
}

std::optional<ThermalEnv> resolve_env(const Common& c) {
  if (!c.m_th && !c.gamma_th) return std::nullopt;
  ThermalEnv env{c.m_th.value_or(0.0), c.gamma_th.value_or(0.0)};
  env.check();
  return env;
}

// Runs `body` against the --out target.
void with_output(const Common& c, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (c.out == "-") {
    body(out);
    out.flush();
    return;
  }
  std::ofstream file(c.out);
  if (!file) throw IoError("cannot open output file: " + c.out);
  body(file);
  file.flush();
  if (!file) throw IoError("write failed: " + c.out);
}

void kv(std::ostream& out, const char* key, double value) { out << key << " = " << format_number(value) << '\n'; }

void write_rates(std::ostream& out, const SystemParams& p, const std::optional<ThermalEnv>& env) {
  const RateSet r = transition_rates(p);
  const DressedSpectrum ds = dressed_spectrum(p);
  out << "pump = " << to_string(p.pump) << '\n';
  kv(out, "omega_plus", ds.omega_plus);
  kv(out, "omega_minus", ds.omega_minus);
  kv(out, "theta", ds.theta);
  kv(out, "s2", r.s2);
  kv(out, "a2_kappa_plus", r.a2_kappa_plus);
  kv(out, "a2_kappa_minus", r.a2_kappa_minus);
  kv(out, "a2_gamma_plus", r.a2_gamma_plus);
  kv(out, "a2_gamma_minus", r.a2_gamma_minus);
  kv(out, "a_plus", r.a_plus);
  kv(out, "a_minus", r.a_minus);
  kv(out, "gamma_cool", r.gamma_cool);
  if (r.m_inf) {
    kv(out, "m_inf", *r.m_inf);
    const SidebandRates s = sideband_rates(r, *r.m_inf);
    kv(out, "r_kappa_plus", s.r_kappa_plus);
    kv(out, "r_kappa_minus", s.r_kappa_minus);
    kv(out, "r_gamma_plus", s.r_gamma_plus);
    kv(out, "r_gamma_minus", s.r_gamma_minus);
  } else {
    out << "m_inf = none\n";
  }
  if (env) {
    const ThermalRates th = thermal_rates(r, *env);
    kv(out, "thermal_a_plus", th.a_plus);
    kv(out, "thermal_a_minus", th.a_minus);
    kv(out, "thermal_gamma_cool", th.gamma_cool);
    if (th.m_inf)
      kv(out, "thermal_m_inf", *th.m_inf);
    else
      out << "thermal_m_inf = none\n";
  }
}

oracle::Integrator parse_integrator(const std::string& s) {
  if (s == "rk4") return oracle::Integrator::RungeKutta4;
  if (s == "sdirk") return oracle::Integrator::ImplicitSdirk;
  throw ValidationError("unknown integrator: " + s);
}

oracle::SteadyStateMethod parse_method(const std::string& s) {
  if (s == "auto") return oracle::SteadyStateMethod::Auto;
  if (s == "linear") return oracle::SteadyStateMethod::LinearSolve;
  if (s == "implicit") return oracle::SteadyStateMethod::ImplicitEvolution;
  if (s == "evolution") return oracle::SteadyStateMethod::TimeEvolution;
  throw ValidationError("unknown steady-state method: " + s);
}

void add_truncation(CLI::App* cmd, oracle::Truncation& t) {
  cmd->add_option("--n_cav_max", t.n_cav_max, "photon cutoff")->capture_default_str();
  cmd->add_option("--n_mech_max", t.n_mech_max, "phonon cutoff")->capture_default_str();
  cmd->add_option("--max_dim", t.max_dim, "largest Hilbert-space dimension allowed")->capture_default_str();
}

void write_commented(std::ostream& out, const std::string& block) {
  std::istringstream lines(block);
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cavity-assisted optomechanical cooling calculator"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "optocool 0.1.0");

  Common common;
  app.add_option("--config", common.config, "flat key = value parameter file");
  app.add_option("--out", common.out, "output path, - for standard output")->capture_default_str();
  app.add_option("--threads", common.threads, "worker threads for sweeps (0: all cores)")->capture_default_str();
  app.add_option("--seed", common.seed, "accepted for compatibility; all computations are deterministic");
  app.add_option("--eta_max", common.eta_max, "perturbative-regime warning threshold for chi")->capture_default_str();
  app.add_option("--m_th", common.m_th, "mechanical bath occupation");
  app.add_option("--gamma_th", common.gamma_th, "mechanical damping rate");
  for (const std::string& key : param_keys()) {
    app.add_option_function<std::string>(
        "--" + key, [&common, key](const std::string& v) { common.overrides[key] = v; }, "override " + key);
  }

  // rates
  auto* rates_cmd = app.add_subcommand("rates", "closed-form rates at one point");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "closed-form rates on a detuning grid (CSV)");
  AxisFlags dc_axis, da_axis;
  dc_axis.add(sweep_cmd, "delta_cav", -8.0, 8.0, 81);
  da_axis.add(sweep_cmd, "delta_atom", -4.0, 4.0, 81);

  // evolve
  auto* evolve_cmd = app.add_subcommand("evolve", "phonon rate-equation trajectory (CSV)");
  int evolve_m0 = 5;
  int evolve_levels = 40;
  double evolve_t = 0.0;
  double evolve_dt = 0.0;
  int evolve_every = 1;
  std::optional<double> evolve_a_plus, evolve_a_minus;
  evolve_cmd->add_option("--m0", evolve_m0, "initial Fock level")->capture_default_str();
  evolve_cmd->add_option("--levels", evolve_levels, "ladder truncation M")->capture_default_str();
  evolve_cmd->add_option("--t", evolve_t, "final time")->required();
  evolve_cmd->add_option("--dt", evolve_dt, "step size")->required();
  evolve_cmd->add_option("--sample_every", evolve_every, "steps between samples")->capture_default_str();
  evolve_cmd->add_option("--a_plus", evolve_a_plus, "heating rate (default: from the parameters)");
  evolve_cmd->add_option("--a_minus", evolve_a_minus, "cooling rate (default: from the parameters)");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "master-equation run (CSV + summary)");
  oracle::Truncation oracle_trunc;
  add_truncation(oracle_cmd, oracle_trunc);
  std::string oracle_mode = "evolve";
  double oracle_t = 10.0;
  double oracle_dt = 0.01;
  int oracle_m0 = 0;
  int oracle_every = 10;
  std::string oracle_integrator = "rk4";
  std::string oracle_method = "auto";
  std::string oracle_summary;
  oracle_cmd->add_option("--mode", oracle_mode, "evolve or cooling")
      ->check(CLI::IsMember({"evolve", "cooling"}))
      ->capture_default_str();
  oracle_cmd->add_option("--t", oracle_t, "final time (evolve mode)")->capture_default_str();
  oracle_cmd->add_option("--dt", oracle_dt, "step size (evolve mode)")->capture_default_str();
  oracle_cmd->add_option("--m0", oracle_m0, "initial phonon number")->capture_default_str();
  oracle_cmd->add_option("--sample_every", oracle_every, "steps between samples")->capture_default_str();
  oracle_cmd->add_option("--integrator", oracle_integrator, "rk4 or sdirk")->capture_default_str();
  oracle_cmd->add_option("--method", oracle_method, "steady state: auto, linear, implicit, evolution")
      ->capture_default_str();
  oracle_cmd->add_option("--summary", oracle_summary, "summary path (default: '#' lines after the CSV)");

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "master equation against closed form at one point");
  CompareOptions compare_opts;
  add_truncation(compare_cmd, compare_opts.trunc);
  bool compare_no_fit = false;
  bool compare_no_cutoff = false;
  compare_cmd->add_flag("--no_fit", compare_no_fit, "skip the time-resolved rate measurement");
  compare_cmd->add_flag("--no_cutoff_check", compare_no_cutoff, "skip the enlarged-truncation rerun");
  compare_cmd->add_option("--tolerance", compare_opts.tolerance, "relative error bound")->capture_default_str();

  // resonances
  auto* res_cmd = app.add_subcommand("resonances", "dressed-state resonance curves (CSV)");
  AxisFlags res_axis;
  res_axis.add(res_cmd, "delta_cav", -8.0, 8.0, 161);
  double res_target = 0.0;
  std::string res_branch = "plus";
  res_cmd->add_option("--target", res_target, "dressed frequency to match")->capture_default_str();
  res_cmd->add_option("--branch", res_branch, "plus or minus")
      ->check(CLI::IsMember({"plus", "minus"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    app.exit(e, err, err);
    return kExitValidation;
  }

  try {
    const SystemParams params = resolve_params(common, err);
    const std::optional<ThermalEnv> env = resolve_env(common);

    if (rates_cmd->parsed()) {
      transition_rates(params);  // fail before opening the output
      with_output(common, out, [&](std::ostream& o) { write_rates(o, params, env); });
    } else if (sweep_cmd->parsed()) {
      const SweepGrid grid{dc_axis.axis, da_axis.axis, params};
      const auto records = run_sweep(grid, common.threads);
      std::size_t degenerate = 0;
      for (const auto& r : records) degenerate += r.degenerate ? 1 : 0;
      if (degenerate > 0) err << "warning: " << degenerate << " grid points hit a vanishing denominator\n";
      with_output(common, out, [&](std::ostream& o) { write_sweep_csv(o, records); });
    } else if (evolve_cmd->parsed()) {
      PhononRates rates;
      if (evolve_a_plus || evolve_a_minus) {
        if (!evolve_a_plus || !evolve_a_minus) throw ValidationError("--a_plus and --a_minus go together");
        rates = {*evolve_a_plus, *evolve_a_minus};
      } else {
        rates = PhononRates(transition_rates(params));
      }
      if (evolve_m0 < 0 || evolve_m0 > evolve_levels) throw ValidationError("--m0 must lie on the ladder");
      const auto result = evolve_populations(rates, PhononDistribution::fock(evolve_m0, evolve_levels), evolve_t,
                                             evolve_dt, EvolveOptions{evolve_every});
      for (const auto& w : result.warnings) err << "warning: " << w << '\n';
      with_output(common, out, [&](std::ostream& o) { write_trajectory_csv(o, result.samples); });
    } else if (oracle_cmd->parsed()) {
      oracle_trunc.check();
      oracle::SteadyStateOptions ss_opts;
      ss_opts.method = parse_method(oracle_method);
      std::vector<oracle::Sample> series;
      std::ostringstream summary;
      if (oracle_mode == "evolve") {
        oracle::EvolveOptions ev_opts;
        ev_opts.integrator = parse_integrator(oracle_integrator);
        ev_opts.sample_every = oracle_every;
        if (oracle_m0 < 0 || oracle_m0 > oracle_trunc.n_mech_max)
          throw ValidationError("--m0 must lie below the phonon cutoff");
        const auto rho0 = oracle::QuantumState::ground(oracle_trunc, oracle_m0);
        const auto ev = oracle::evolve(params, env, oracle_trunc, rho0, oracle_t, oracle_dt, ev_opts);
        series = ev.series;
        summary << "dt_used = " << format_number(ev.dt_used) << '\n'
                << "max_trace_drift = " << format_number(ev.max_trace_drift) << '\n';
      } else {
        oracle::CoolingOptions c_opts;
        c_opts.initial_phonons = oracle_m0 > 0 ? oracle_m0 : c_opts.initial_phonons;
        const auto ss = oracle::steady_state(params, env, oracle_trunc, ss_opts);
        const auto run = oracle::measure_cooling(params, env, oracle_trunc, c_opts, ss.obs.n_mech);
        series = run.series;
        summary << "gamma_fit = " << format_number(run.fit.gamma) << '\n'
                << "fit_m_inf = " << format_number(run.fit.m_inf) << '\n'
                << "fit_residual = " << format_number(run.fit.residual) << '\n'
                << "fit_flagged = " << (run.fit.flagged ? 1 : 0) << '\n';
        if (run.fit.flagged) err << "warning: cooling fit flagged: " << run.fit.reason << '\n';
      }
      const auto ss = oracle::steady_state(params, env, oracle_trunc, ss_opts);
      oracle::write_summary(summary, ss);

      if (oracle_summary.empty()) {
        with_output(common, out, [&](std::ostream& o) {
          oracle::write_series_csv(o, series);
          write_commented(o, summary.str());
        });
      } else {
        with_output(common, out, [&](std::ostream& o) { oracle::write_series_csv(o, series); });
        Common side = common;
        side.out = oracle_summary;
        with_output(side, out, [&](std::ostream& o) { o << summary.str(); });
      }
    } else if (compare_cmd->parsed()) {
      compare_opts.fit_rate = !compare_no_fit;
      compare_opts.check_cutoff = !compare_no_cutoff;
      const Comparison c = compare_point(params, env, compare_opts);
      if (c.cooling && c.cooling->fit.flagged) err << "warning: cooling fit flagged: " << c.cooling->fit.reason << '\n';
      with_output(common, out, [&](std::ostream& o) { write_report(o, c); });
    } else if (res_cmd->parsed()) {
      const auto branch = res_branch == "plus" ? Branch::Plus : Branch::Minus;
      const auto points = resonance_curves(params, res_target, branch, res_axis.axis);
      with_output(common, out, [&](std::ostream& o) { write_resonance_csv(o, points); });
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace optocool::cli

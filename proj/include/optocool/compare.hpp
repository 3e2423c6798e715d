#pragma once

#include <iosfwd>
#include <optional>

#include "optocool/oracle.hpp"
#include "optocool/rates.hpp"

namespace optocool {

struct CompareOptions {
  oracle::Truncation trunc;
  oracle::CoolingOptions cooling;
  bool fit_rate = true;      ///< run the time-resolved cooling measurement
  bool check_cutoff = true;  ///< repeat the steady state on Truncation::enlarged()
  double tolerance = 0.10;
  double cutoff_tolerance = 0.01;
};

/// Closed-form prediction vs master-equation measurement at one parameter point.
struct Comparison {
  SystemParams params;
  std::optional<ThermalEnv> env;

  RateSet analytic;
  double gamma_analytic = 0.0;          ///< includes the bath when env is set
  std::optional<double> m_analytic;     ///< absent in heating regions

  oracle::SteadyState steady;
  std::optional<oracle::CoolingRun> cooling;
  double gamma_fit = 0.0;

  double rel_err_gamma = 0.0;  ///< NaN when not measured
  double rel_err_m = 0.0;      ///< NaN when m_analytic is absent
  double rel_err_s2 = 0.0;     ///< <a^dagger a>_ss against |S|^2
  double cutoff_change = 0.0;  ///< largest relative change of steady observables, NaN when skipped

  bool sign_agrees = true;
  bool cutoff_ok = true;
  bool pass = false;
};

Comparison compare_point(const SystemParams& params, const std::optional<ThermalEnv>& env,
                         const CompareOptions& options = {});

/// Flat "key = value" report.
void write_report(std::ostream& out, const Comparison& c);

}  // namespace optocool

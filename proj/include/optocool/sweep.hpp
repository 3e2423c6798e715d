#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "optocool/params.hpp"

namespace optocool {

/// Evenly spaced axis including both end points.
struct Axis {
  double min = 0.0;
  double max = 1.0;
  int count = 2;

  /// Throws ValidationError unless count >= 2 and min < max.
  void check(const char* name) const;
  double at(int i) const;
};

struct SweepGrid {
  Axis delta_cav;
  Axis delta_atom;
  SystemParams base;  ///< detunings are overridden per point
};

struct SweepRecord {
  double delta_cav = 0.0;
  double delta_atom = 0.0;
  double s2 = 0.0;
  double a_plus = 0.0;
  double a_minus = 0.0;
  double gamma_cool = 0.0;
  double m_inf = 0.0;  ///< -1 when gamma_cool <= 0
  double r_kappa_plus = 0.0;
  double r_kappa_minus = 0.0;
  double r_gamma_plus = 0.0;
  double r_gamma_minus = 0.0;
  bool degenerate = false;
};

/// Evaluates the closed-form rates on every grid point, row-major in
/// (delta_cav, delta_atom). `threads` <= 0 uses the hardware concurrency.
/// The result is identical for every thread count.
std::vector<SweepRecord> run_sweep(const SweepGrid& grid, int threads = 1);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);

enum class Branch { Plus, Minus };

/// Points (delta_cav, delta_atom) where the dressed-state frequency of the
/// branch equals `target`, one delta_atom per delta_cav at most.
std::vector<std::pair<double, double>> resonance_curves(const SystemParams& params, double target, Branch branch,
                                                        const Axis& delta_cav_axis);

void write_resonance_csv(std::ostream& out, const std::vector<std::pair<double, double>>& points);

}  // namespace optocool

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "optocool/rates.hpp"

namespace optocool {

/// Heating/cooling rates driving the phonon ladder.
struct PhononRates {
  double a_plus = 0.0;
  double a_minus = 0.0;

  PhononRates() = default;
  PhononRates(double a_plus, double a_minus) : a_plus(a_plus), a_minus(a_minus) {}
  explicit PhononRates(const RateSet& rates) : a_plus(rates.a_plus), a_minus(rates.a_minus) {}

  double gamma_cool() const { return a_minus - a_plus; }
};

/// Populations p_0..p_M of the truncated vibrational ladder.
class PhononDistribution {
 public:
  /// Throws ValidationError for fewer than two levels or negative entries.
  explicit PhononDistribution(std::vector<double> populations);

  static PhononDistribution fock(int m, int truncation);

  int truncation() const { return static_cast<int>(populations_.size()) - 1; }
  const std::vector<double>& populations() const { return populations_; }
  double operator[](std::size_t m) const { return populations_[m]; }

  double total() const;
  double mean() const;
  /// Weight of the top level relative to the total mass.
  double top_fraction() const;
  /// Total-variation distance, both distributions on the same ladder.
  double total_variation(const PhononDistribution& other) const;

 private:
  std::vector<double> populations_;
};

inline constexpr double kTruncationTolerance = 1e-6;

struct EvolveOptions {
  /// Record a sample every `sample_every` steps (0: only start and end).
  int sample_every = 0;
};

struct PhononSample {
  double t = 0.0;
  std::vector<double> populations;
  double mean = 0.0;
};

struct PhononEvolution {
  PhononDistribution final_state;
  std::vector<PhononSample> samples;
  std::vector<std::string> warnings;
};

/// Fixed-step fourth-order integration of the phonon rate equation.
/// Requires dt > 0 and dt * M * (A+ + A-) < 0.1; throws ValidationError otherwise.
PhononEvolution evolve_populations(const PhononRates& rates, const PhononDistribution& initial,
                                   double t_final, double dt, const EvolveOptions& options = {});

struct StationaryPhonons {
  PhononDistribution distribution;
  double truncated_mean = 0.0;
  double closed_form_mean = 0.0;  ///< A+ / Gamma
};

/// Normalized geometric distribution with ratio A+/A-. Throws NoStationaryState
/// when Gamma <= 0.
StationaryPhonons stationary_distribution(const PhononRates& rates, int truncation);

/// <m>(t) from the first moment of the rate equation (untruncated ladder).
double mean_phonon_trajectory(const PhononRates& rates, double m0, double t);

/// CSV with columns t, mean_m, p_0..p_M.
void write_trajectory_csv(std::ostream& out, const std::vector<PhononSample>& samples);

}  // namespace optocool

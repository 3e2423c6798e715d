#pragma once

#include <optional>

#include "optocool/params.hpp"

namespace optocool {

/// Squared mechanical transition amplitudes, resolved by decay channel
/// (cavity loss / atomic fluorescence) and by direction (Stokes + / anti-Stokes -).
struct MechanicalAmplitudes {
  double kappa_plus = 0.0;
  double kappa_minus = 0.0;
  double gamma_plus = 0.0;
  double gamma_minus = 0.0;
};

/// Heating (+) and cooling (-) rates of the light-scattering cycle.
struct RateSet {
  double s2 = 0.0;  ///< cavity excitation probability |S|^2
  double a2_kappa_plus = 0.0;
  double a2_kappa_minus = 0.0;
  double a2_gamma_plus = 0.0;
  double a2_gamma_minus = 0.0;
  double a_plus = 0.0;
  double a_minus = 0.0;
  double gamma_cool = 0.0;      ///< A- - A+, negative means net heating
  std::optional<double> m_inf;  ///< A+/Gamma, present iff gamma_cool > 0

  // Channel weights (2 kappa, gamma) needed to split A+- per decay channel.
  double cavity_weight = 0.0;
  double atom_weight = 0.0;

  /// Builds a rate set from bare A+- (no channel information; everything is
  /// booked on the cavity channel).
  static RateSet from_rates(double a_plus, double a_minus);
};

/// Photon flux into the Stokes (+) and anti-Stokes (-) sidebands.
struct SidebandRates {
  double r_kappa_plus = 0.0;
  double r_kappa_minus = 0.0;
  double r_gamma_plus = 0.0;
  double r_gamma_minus = 0.0;
  double r_plus = 0.0;
  double r_minus = 0.0;
};

/// Mechanical contact with a thermal bath.
struct ThermalEnv {
  double m_th = 0.0;      ///< bath occupation
  double gamma_th = 0.0;  ///< mechanical damping rate

  void check() const;
};

struct ThermalRates {
  double a_plus = 0.0;
  double a_minus = 0.0;
  double gamma_cool = 0.0;
  std::optional<double> m_inf;
};

struct CooperativityLimit {
  double cooperativity = 0.0;  ///< C = 2 g^2 / (kappa gamma)
  double m_inf = 0.0;          ///< 1/C + (gamma/4)^2
  double gamma_cool = 0.0;     ///< 2 chi^2 |S|^2 / kappa
};

/// Resonance denominator D(upsilon) = |(delta+u+i gamma/2)(Delta+u+i kappa) - g^2|^2.
double denominator_d(const SystemParams& params, double upsilon);

/// |S|^2 for the configured pump scheme; nullopt when D(0) == 0.
std::optional<double> excitation_probability(const SystemParams& params);

/// nullopt when D(-1) or D(+1) vanishes.
std::optional<MechanicalAmplitudes> mechanical_amplitudes(const SystemParams& params);

/// Full closed-form rate chain; nullopt when any of D(0), D(+-1) vanishes.
std::optional<RateSet> try_transition_rates(const SystemParams& params);

/// Full closed-form rate chain. Throws DegenerateDenominator when any of
/// D(0), D(+-1) vanishes.
RateSet transition_rates(const SystemParams& params);

/// R+- = (m_mean + [+]) A+-, split per decay channel. Throws ValidationError
/// for negative m_mean.
SidebandRates sideband_rates(const RateSet& rates, double m_mean);

ThermalRates thermal_rates(const RateSet& rates, const ThermalEnv& env);

/// Laser-cavity detuning that centres the cooling resonance at delta = nu.
double optimal_detuning(const SystemParams& params);

/// Asymptotic floor and rate for kappa >> gamma at delta = nu, Delta = Delta_opt.
/// Throws ValidationError when kappa * gamma == 0.
CooperativityLimit cooperativity_limit(const SystemParams& params);

}  // namespace optocool

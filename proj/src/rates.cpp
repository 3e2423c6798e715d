#include "optocool/rates.hpp"

#include <cmath>

#include "optocool/error.hpp"

namespace optocool {

// The operation order below is mirrored lane-for-lane by the SIMD rate
// kernels; keep the two in sync (see src/simd/rate_kernel_avx2.cpp).

double denominator_d(const SystemParams& p, double upsilon) {
  const double x = p.delta_atom + upsilon;
  const double y = p.delta_cav + upsilon;
  const double damp = (p.gamma * p.kappa) * 0.5;
  const double re = (x * y - p.g * p.g) - damp;
  const double im = p.kappa * x + (0.5 * p.gamma) * y;
  return re * re + im * im;
}

std::optional<double> excitation_probability(const SystemParams& p) {
  const double d0 = denominator_d(p, 0.0);
  if (d0 == 0.0) return std::nullopt;
  const double half_gamma = 0.5 * p.gamma;
  const double numerator = p.pump == PumpScheme::Cavity
                               ? p.delta_atom * p.delta_atom + half_gamma * half_gamma
                               : p.g * p.g;
  const double drive = (p.omega_drive * p.omega_drive) * 0.25;
  return (drive * numerator) / d0;
}

std::optional<MechanicalAmplitudes> mechanical_amplitudes(const SystemParams& p) {
  // Stokes (+) pairs with D(-nu), anti-Stokes (-) with D(+nu).
  const double d_stokes = denominator_d(p, -1.0);
  const double d_anti = denominator_d(p, 1.0);
  if (d_stokes == 0.0 || d_anti == 0.0) return std::nullopt;

  const double chi2 = p.chi * p.chi;
  const double g2 = p.g * p.g;
  const double half_gamma = 0.5 * p.gamma;
  const double gq = half_gamma * half_gamma;
  const double xs = p.delta_atom - 1.0;
  const double xa = p.delta_atom + 1.0;

  MechanicalAmplitudes out;
  out.kappa_plus = (chi2 * (xs * xs + gq)) / d_stokes;
  out.kappa_minus = (chi2 * (xa * xa + gq)) / d_anti;
  out.gamma_plus = (chi2 * g2) / d_stokes;
  out.gamma_minus = (chi2 * g2) / d_anti;
  return out;
}

RateSet RateSet::from_rates(double a_plus, double a_minus) {
  RateSet r;
  r.a_plus = a_plus;
  r.a_minus = a_minus;
  r.gamma_cool = a_minus - a_plus;
  if (r.gamma_cool > 0.0) r.m_inf = a_plus / r.gamma_cool;
  // Book everything on the cavity channel with unit weight.
  r.s2 = 1.0;
  r.cavity_weight = 1.0;
  r.a2_kappa_plus = a_plus;
  r.a2_kappa_minus = a_minus;
  return r;
}

std::optional<RateSet> try_transition_rates(const SystemParams& p) {
  const auto s2 = excitation_probability(p);
  const auto amps = mechanical_amplitudes(p);
  if (!s2 || !amps) return std::nullopt;

  RateSet r;
  r.s2 = *s2;
  r.a2_kappa_plus = amps->kappa_plus;
  r.a2_kappa_minus = amps->kappa_minus;
  r.a2_gamma_plus = amps->gamma_plus;
  r.a2_gamma_minus = amps->gamma_minus;
  r.cavity_weight = 2.0 * p.kappa;
  r.atom_weight = p.gamma;
  r.a_plus = r.s2 * (r.cavity_weight * r.a2_kappa_plus + r.atom_weight * r.a2_gamma_plus);
  r.a_minus = r.s2 * (r.cavity_weight * r.a2_kappa_minus + r.atom_weight * r.a2_gamma_minus);
  r.gamma_cool = r.a_minus - r.a_plus;
  if (r.gamma_cool > 0.0) r.m_inf = r.a_plus / r.gamma_cool;
  return r;
}

RateSet transition_rates(const SystemParams& p) {
  auto r = try_transition_rates(p);
  if (!r) throw DegenerateDenominator("resonance denominator vanishes (g = 0 with an undamped crossing)");
  return *r;
}

SidebandRates sideband_rates(const RateSet& r, double m_mean) {
  if (!(m_mean >= 0.0)) throw ValidationError("m_mean must be non-negative");
  const double up = m_mean + 1.0;
  SidebandRates out;
  out.r_kappa_plus = up * (r.s2 * (r.cavity_weight * r.a2_kappa_plus));
  out.r_gamma_plus = up * (r.s2 * (r.atom_weight * r.a2_gamma_plus));
  out.r_kappa_minus = m_mean * (r.s2 * (r.cavity_weight * r.a2_kappa_minus));
  out.r_gamma_minus = m_mean * (r.s2 * (r.atom_weight * r.a2_gamma_minus));
  out.r_plus = out.r_kappa_plus + out.r_gamma_plus;
  out.r_minus = out.r_kappa_minus + out.r_gamma_minus;
  return out;
}

void ThermalEnv::check() const {
  if (!(m_th >= 0.0) || !std::isfinite(m_th)) throw ValidationError("m_th must be non-negative");
  if (!(gamma_th >= 0.0) || !std::isfinite(gamma_th))
    throw ValidationError("gamma_th must be non-negative");
}

ThermalRates thermal_rates(const RateSet& r, const ThermalEnv& env) {
  env.check();
  ThermalRates out;
  out.a_plus = r.a_plus + env.m_th * env.gamma_th;
  out.a_minus = r.a_minus + (env.m_th + 1.0) * env.gamma_th;
  out.gamma_cool = out.a_minus - out.a_plus;
  if (out.gamma_cool > 0.0) out.m_inf = out.a_plus / out.gamma_cool;
  return out;
}

double optimal_detuning(const SystemParams& p) {
  return (p.kappa * p.gamma * 0.5 + p.g * p.g) / 2.0 - 1.0;
}

CooperativityLimit cooperativity_limit(const SystemParams& p) {
  if (p.kappa * p.gamma == 0.0)
    throw ValidationError("cooperativity undefined for kappa * gamma == 0");
  CooperativityLimit out;
  out.cooperativity = 2.0 * p.g * p.g / (p.kappa * p.gamma);
  const double noise = p.gamma / 4.0;
  out.m_inf = 1.0 / out.cooperativity + noise * noise;
  const auto s2 = excitation_probability(p);
  out.gamma_cool = s2 ? 2.0 * p.chi * p.chi / p.kappa * *s2 : 0.0;
  return out;
}

}  // namespace optocool

#include <cmath>
#include <limits>

#include "birth_death_common.hpp"
#include "optocool/rates.hpp"
#include "optocool/simd/kernels.hpp"

namespace optocool::simd::scalar {

void rate_batch(const SystemParams& base, std::span<const double> delta_cav,
                std::span<const double> delta_atom, const RateBatchOut& out) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  SystemParams p = base;
  for (std::size_t i = 0; i < delta_cav.size(); ++i) {
    p.delta_cav = delta_cav[i];
    p.delta_atom = delta_atom[i];
    const auto rates = try_transition_rates(p);
    if (!rates) {
      out.s2[i] = out.a_plus[i] = out.a_minus[i] = out.gamma_cool[i] = out.m_inf[i] = nan;
      out.r_kappa_plus[i] = out.r_kappa_minus[i] = out.r_gamma_plus[i] = out.r_gamma_minus[i] = nan;
      out.degenerate[i] = 1;
      continue;
    }
    out.degenerate[i] = 0;
    out.s2[i] = rates->s2;
    out.a_plus[i] = rates->a_plus;
    out.a_minus[i] = rates->a_minus;
    out.gamma_cool[i] = rates->gamma_cool;
    if (rates->m_inf) {
      const auto sb = sideband_rates(*rates, *rates->m_inf);
      out.m_inf[i] = *rates->m_inf;
      out.r_kappa_plus[i] = sb.r_kappa_plus;
      out.r_kappa_minus[i] = sb.r_kappa_minus;
      out.r_gamma_plus[i] = sb.r_gamma_plus;
      out.r_gamma_minus[i] = sb.r_gamma_minus;
    } else {
      out.m_inf[i] = kNoStationary;
      out.r_kappa_plus[i] = out.r_kappa_minus[i] = kNoStationary;
      out.r_gamma_plus[i] = out.r_gamma_minus[i] = kNoStationary;
    }
  }
}

void birth_death_rhs(double a_plus, double a_minus, std::span<const double> p, std::span<double> out) {
  for (std::size_t m = 0; m < p.size(); ++m) out[m] = detail::birth_death_row(a_plus, a_minus, p, m);
}

}  // namespace optocool::simd::scalar

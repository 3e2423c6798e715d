// Compiled with -mavx2. Only reached after the runtime CPU check in dispatch.cpp.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "birth_death_common.hpp"
#include "optocool/simd/kernels.hpp"

namespace optocool::simd::avx2 {

namespace {

inline __m256d add(__m256d a, __m256d b) { return _mm256_add_pd(a, b); }
inline __m256d sub(__m256d a, __m256d b) { return _mm256_sub_pd(a, b); }
inline __m256d mul(__m256d a, __m256d b) { return _mm256_mul_pd(a, b); }
inline __m256d div(__m256d a, __m256d b) { return _mm256_div_pd(a, b); }

// Mirrors optocool::denominator_d.
inline __m256d denominator(__m256d delta_atom, __m256d delta_cav, __m256d upsilon, __m256d g2,
                           __m256d damp, __m256d kappa, __m256d half_gamma) {
  const __m256d x = add(delta_atom, upsilon);
  const __m256d y = add(delta_cav, upsilon);
  const __m256d re = sub(sub(mul(x, y), g2), damp);
  const __m256d im = add(mul(kappa, x), mul(half_gamma, y));
  return add(mul(re, re), mul(im, im));
}

}  // namespace

void rate_batch(const SystemParams& base, std::span<const double> delta_cav,
                std::span<const double> delta_atom, const RateBatchOut& out) {
  const std::size_t n = delta_cav.size();
  const std::size_t vec_end = n - n % 4;

  const double half_gamma_s = 0.5 * base.gamma;
  const __m256d g = _mm256_set1_pd(base.g);
  const __m256d g2 = mul(g, g);
  const __m256d kappa = _mm256_set1_pd(base.kappa);
  const __m256d gamma = _mm256_set1_pd(base.gamma);
  const __m256d half_gamma = _mm256_set1_pd(half_gamma_s);
  const __m256d damp = mul(mul(gamma, kappa), _mm256_set1_pd(0.5));
  const __m256d omega = _mm256_set1_pd(base.omega_drive);
  const __m256d drive = mul(mul(omega, omega), _mm256_set1_pd(0.25));
  const __m256d chi = _mm256_set1_pd(base.chi);
  const __m256d chi2 = mul(chi, chi);
  const __m256d gq = mul(half_gamma, half_gamma);
  const __m256d cavity_weight = mul(_mm256_set1_pd(2.0), kappa);
  const __m256d atom_weight = gamma;
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d minus_one = _mm256_set1_pd(-1.0);
  const __m256d sentinel = _mm256_set1_pd(kNoStationary);
  const __m256d nan = _mm256_set1_pd(std::numeric_limits<double>::quiet_NaN());
  const bool cavity_pumped = base.pump == PumpScheme::Cavity;

  for (std::size_t i = 0; i < vec_end; i += 4) {
    const __m256d dc = _mm256_loadu_pd(delta_cav.data() + i);
    const __m256d da = _mm256_loadu_pd(delta_atom.data() + i);

    const __m256d d0 = denominator(da, dc, zero, g2, damp, kappa, half_gamma);
    const __m256d numerator = cavity_pumped ? add(mul(da, da), gq) : g2;
    const __m256d s2 = div(mul(drive, numerator), d0);

    const __m256d d_stokes = denominator(da, dc, minus_one, g2, damp, kappa, half_gamma);
    const __m256d d_anti = denominator(da, dc, one, g2, damp, kappa, half_gamma);
    const __m256d xs = sub(da, one);
    const __m256d xa = add(da, one);
    const __m256d kp = div(mul(chi2, add(mul(xs, xs), gq)), d_stokes);
    const __m256d km = div(mul(chi2, add(mul(xa, xa), gq)), d_anti);
    const __m256d gp = div(mul(chi2, g2), d_stokes);
    const __m256d gm = div(mul(chi2, g2), d_anti);

    const __m256d a_plus = mul(s2, add(mul(cavity_weight, kp), mul(atom_weight, gp)));
    const __m256d a_minus = mul(s2, add(mul(cavity_weight, km), mul(atom_weight, gm)));
    const __m256d gc = sub(a_minus, a_plus);
    const __m256d cooling = _mm256_cmp_pd(gc, zero, _CMP_GT_OQ);
    const __m256d m = div(a_plus, gc);
    const __m256d up = add(m, one);
    const __m256d r_kp = mul(up, mul(s2, mul(cavity_weight, kp)));
    const __m256d r_gp = mul(up, mul(s2, mul(atom_weight, gp)));
    const __m256d r_km = mul(m, mul(s2, mul(cavity_weight, km)));
    const __m256d r_gm = mul(m, mul(s2, mul(atom_weight, gm)));

    const __m256d degenerate = _mm256_or_pd(
        _mm256_cmp_pd(d0, zero, _CMP_EQ_OQ),
        _mm256_or_pd(_mm256_cmp_pd(d_stokes, zero, _CMP_EQ_OQ), _mm256_cmp_pd(d_anti, zero, _CMP_EQ_OQ)));

    auto stationary = [&](__m256d v) {
      return _mm256_blendv_pd(_mm256_blendv_pd(sentinel, v, cooling), nan, degenerate);
    };
    auto plain = [&](__m256d v) { return _mm256_blendv_pd(v, nan, degenerate); };

    _mm256_storeu_pd(out.s2.data() + i, plain(s2));
    _mm256_storeu_pd(out.a_plus.data() + i, plain(a_plus));
    _mm256_storeu_pd(out.a_minus.data() + i, plain(a_minus));
    _mm256_storeu_pd(out.gamma_cool.data() + i, plain(gc));
    _mm256_storeu_pd(out.m_inf.data() + i, stationary(m));
    _mm256_storeu_pd(out.r_kappa_plus.data() + i, stationary(r_kp));
    _mm256_storeu_pd(out.r_kappa_minus.data() + i, stationary(r_km));
    _mm256_storeu_pd(out.r_gamma_plus.data() + i, stationary(r_gp));
    _mm256_storeu_pd(out.r_gamma_minus.data() + i, stationary(r_gm));

    const int mask = _mm256_movemask_pd(degenerate);
    for (int k = 0; k < 4; ++k) out.degenerate[i + k] = static_cast<std::uint8_t>((mask >> k) & 1);
  }

  if (vec_end < n) {
    const std::size_t rest = n - vec_end;
    const RateBatchOut tail{out.s2.subspan(vec_end, rest),
                            out.a_plus.subspan(vec_end, rest),
                            out.a_minus.subspan(vec_end, rest),
                            out.gamma_cool.subspan(vec_end, rest),
                            out.m_inf.subspan(vec_end, rest),
                            out.r_kappa_plus.subspan(vec_end, rest),
                            out.r_kappa_minus.subspan(vec_end, rest),
                            out.r_gamma_plus.subspan(vec_end, rest),
                            out.r_gamma_minus.subspan(vec_end, rest),
                            out.degenerate.subspan(vec_end, rest)};
    scalar::rate_batch(base, delta_cav.subspan(vec_end), delta_atom.subspan(vec_end), tail);
  }
}

void birth_death_rhs(double a_plus, double a_minus, std::span<const double> p, std::span<double> out) {
  const std::size_t n = p.size();
  if (n < 3) {
    scalar::birth_death_rhs(a_plus, a_minus, p, out);
    return;
  }
  const std::size_t top = n - 1;
  out[0] = detail::birth_death_row(a_plus, a_minus, p, 0);

  const __m256d ap = _mm256_set1_pd(a_plus);
  const __m256d am = _mm256_set1_pd(a_minus);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d step = _mm256_set1_pd(4.0);
  __m256d md = _mm256_set_pd(4.0, 3.0, 2.0, 1.0);

  std::size_t m = 1;
  for (; m + 4 <= top; m += 4) {
    const __m256d prev = _mm256_loadu_pd(p.data() + m - 1);
    const __m256d cur = _mm256_loadu_pd(p.data() + m);
    const __m256d next = _mm256_loadu_pd(p.data() + m + 1);
    const __m256d mp1 = _mm256_add_pd(md, one);
    const __m256d loss = _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(md, am), _mm256_mul_pd(mp1, ap)), cur);
    const __m256d gain =
        _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(mp1, am), next), _mm256_mul_pd(_mm256_mul_pd(md, ap), prev));
    _mm256_storeu_pd(out.data() + m, _mm256_sub_pd(gain, loss));
    md = _mm256_add_pd(md, step);
  }
  for (; m <= top; ++m) out[m] = detail::birth_death_row(a_plus, a_minus, p, m);
}

}  // namespace optocool::simd::avx2

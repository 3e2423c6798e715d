#pragma once

// Data-parallel inner loops with a scalar reference implementation and SIMD
// variants picked at runtime. Every variant performs the same IEEE operations
// in the same order as the scalar path, so results are bit-identical; the
// equivalence suite in tests/test_kernels.cpp enforces this.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "optocool/params.hpp"

namespace optocool::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// True when the variant was compiled in and the CPU can run it.
bool isa_supported(Isa isa);

/// The variant currently used by the dispatching entry points. Defaults to the
/// widest supported one; the OPTOCOOL_ISA environment variable ("scalar",
/// "avx2") overrides the default on first use.
Isa active_isa();

/// Pins the dispatch target. Throws ValidationError for unsupported variants.
void set_active_isa(Isa isa);

/// Sentinel written for quantities without a stationary value (Gamma <= 0).
inline constexpr double kNoStationary = -1.0;

/// Per-point output of the batched rate chain, structure-of-arrays. All spans
/// must have the same length as the detuning inputs.
struct RateBatchOut {
  std::span<double> s2;
  std::span<double> a_plus;
  std::span<double> a_minus;
  std::span<double> gamma_cool;
  std::span<double> m_inf;          ///< kNoStationary when gamma_cool <= 0
  std::span<double> r_kappa_plus;   ///< stationary sideband flux, kNoStationary when absent
  std::span<double> r_kappa_minus;
  std::span<double> r_gamma_plus;
  std::span<double> r_gamma_minus;
  std::span<std::uint8_t> degenerate;  ///< 1 where a resonance denominator vanished (values NaN)
};

/// Evaluates the closed-form rates at every (delta_cav[i], delta_atom[i]) with
/// the remaining fields taken from `base`.
void rate_batch(const SystemParams& base, std::span<const double> delta_cav,
                std::span<const double> delta_atom, const RateBatchOut& out);

/// Right-hand side of the truncated phonon birth-death chain,
/// out[m] = d p_m / dt, with a reflecting top level (no outflow from m = M).
/// `p` and `out` must have equal length >= 1 and must not alias.
void birth_death_rhs(double a_plus, double a_minus, std::span<const double> p, std::span<double> out);

// Explicit variants, exposed for the equivalence tests.
namespace scalar {
void rate_batch(const SystemParams& base, std::span<const double> delta_cav,
                std::span<const double> delta_atom, const RateBatchOut& out);
void birth_death_rhs(double a_plus, double a_minus, std::span<const double> p, std::span<double> out);
}  // namespace scalar

namespace avx2 {
void rate_batch(const SystemParams& base, std::span<const double> delta_cav,
                std::span<const double> delta_atom, const RateBatchOut& out);
void birth_death_rhs(double a_plus, double a_minus, std::span<const double> p, std::span<double> out);
}  // namespace avx2

}  // namespace optocool::simd

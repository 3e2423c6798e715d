#include <atomic>
#include <cstdlib>
#include <string>

#include "optocool/error.hpp"
#include "optocool/simd/kernels.hpp"

namespace optocool::simd {

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(OPTOCOOL_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

namespace {

Isa default_isa() {
  if (const char* env = std::getenv("OPTOCOOL_ISA")) {
    const std::string_view want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
  }
  return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{default_isa()};
  return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa))
    throw ValidationError("kernel variant '" + std::string(to_string(isa)) + "' is not available on this machine");
  current().store(isa, std::memory_order_relaxed);
}

void rate_batch(const SystemParams& base, std::span<const double> delta_cav,
                std::span<const double> delta_atom, const RateBatchOut& out) {
  if (delta_atom.size() != delta_cav.size() || out.s2.size() < delta_cav.size())
    throw ValidationError("rate_batch: mismatched span lengths");
#ifdef OPTOCOOL_HAVE_AVX2
  if (active_isa() == Isa::Avx2) return avx2::rate_batch(base, delta_cav, delta_atom, out);
#endif
  scalar::rate_batch(base, delta_cav, delta_atom, out);
}

void birth_death_rhs(double a_plus, double a_minus, std::span<const double> p, std::span<double> out) {
  if (p.empty() || out.size() != p.size()) throw ValidationError("birth_death_rhs: bad span lengths");
#ifdef OPTOCOOL_HAVE_AVX2
  if (active_isa() == Isa::Avx2) return avx2::birth_death_rhs(a_plus, a_minus, p, out);
#endif
  scalar::birth_death_rhs(a_plus, a_minus, p, out);
}

#ifndef OPTOCOOL_HAVE_AVX2
namespace avx2 {
void rate_batch(const SystemParams&, std::span<const double>, std::span<const double>, const RateBatchOut&) {
  throw ValidationError("AVX2 kernels were not compiled in");
}
void birth_death_rhs(double, double, std::span<const double>, std::span<double>) {
  throw ValidationError("AVX2 kernels were not compiled in");
}
}  // namespace avx2
#endif

}  // namespace optocool::simd

#pragma once

// Scalar building blocks of the birth-death right-hand side, shared by every
// kernel variant so that boundary rows round identically.

#include <cstddef>
#include <span>

namespace optocool::simd::detail {

inline double birth_death_row(double a_plus, double a_minus, std::span<const double> p, std::size_t m) {
  const std::size_t top = p.size() - 1;
  const double md = static_cast<double>(m);
  if (top == 0) return 0.0;
  if (m == 0) {
    const double loss = (md * a_minus + (md + 1.0) * a_plus) * p[0];
    return ((md + 1.0) * a_minus) * p[1] - loss;
  }
  if (m == top) {
    // Reflecting boundary: the (M+1) A+ p_M outflow is suppressed.
    const double loss = (md * a_minus) * p[m];
    return (md * a_plus) * p[m - 1] - loss;
  }
  const double loss = (md * a_minus + (md + 1.0) * a_plus) * p[m];
  const double gain = ((md + 1.0) * a_minus) * p[m + 1] + (md * a_plus) * p[m - 1];
  return gain - loss;
}

}  // namespace optocool::simd::detail

#include "optocool/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <string>
#include <thread>

#include "optocool/csv.hpp"
#include "optocool/error.hpp"
#include "optocool/simd/kernels.hpp"

namespace optocool {

void Axis::check(const char* name) const {
  if (count < 2) throw ValidationError(std::string(name) + ": axis needs count >= 2");
  if (!(min < max)) throw ValidationError(std::string(name) + ": axis needs min < max");
}

double Axis::at(int i) const {
  if (i == count - 1) return max;
  return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
}

namespace {

void evaluate_row(const SweepGrid& grid, int row, std::vector<SweepRecord>& records) {
  const auto n = static_cast<std::size_t>(grid.delta_atom.count);
  std::vector<double> dc(n, grid.delta_cav.at(row));
  std::vector<double> da(n);
  for (std::size_t j = 0; j < n; ++j) da[j] = grid.delta_atom.at(static_cast<int>(j));

  std::vector<double> cols(9 * n);
  std::vector<std::uint8_t> flags(n);
  auto col = [&](int k) { return std::span<double>(cols).subspan(static_cast<std::size_t>(k) * n, n); };
  const simd::RateBatchOut out{col(0), col(1), col(2), col(3), col(4), col(5), col(6), col(7), col(8), flags};
  simd::rate_batch(grid.base, dc, da, out);

  const std::size_t offset = static_cast<std::size_t>(row) * n;
  for (std::size_t j = 0; j < n; ++j) {
    SweepRecord& r = records[offset + j];
    r.delta_cav = dc[j];
    r.delta_atom = da[j];
    r.s2 = out.s2[j];
    r.a_plus = out.a_plus[j];
    r.a_minus = out.a_minus[j];
    r.gamma_cool = out.gamma_cool[j];
    r.m_inf = out.m_inf[j];
    r.r_kappa_plus = out.r_kappa_plus[j];
    r.r_kappa_minus = out.r_kappa_minus[j];
    r.r_gamma_plus = out.r_gamma_plus[j];
    r.r_gamma_minus = out.r_gamma_minus[j];
    r.degenerate = flags[j] != 0;
  }
}

}  // namespace

std::vector<SweepRecord> run_sweep(const SweepGrid& grid, int threads) {
  grid.delta_cav.check("delta_cav");
  grid.delta_atom.check("delta_atom");
  validate(grid.base);

  const int rows = grid.delta_cav.count;
  std::vector<SweepRecord> records(static_cast<std::size_t>(rows) * static_cast<std::size_t>(grid.delta_atom.count));
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, rows);

  // Rows are independent and write disjoint slices, so the output does not
  // depend on which worker evaluates which row.
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int row = next++; row < rows; row = next++) evaluate_row(grid, row, records);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  return records;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << "# m_inf and r_* hold -1 where gamma_cool <= 0 (heating, no stationary state)\n"
      << "# degenerate = 1 marks points with a vanishing resonance denominator; their values are nan\n"
      << "delta_cav,delta_atom,s2,a_plus,a_minus,gamma_cool,m_inf,r_kappa_plus,r_kappa_minus,r_gamma_plus,"
         "r_gamma_minus,degenerate\n";
  for (const auto& r : records) {
    for (double v : {r.delta_cav, r.delta_atom, r.s2, r.a_plus, r.a_minus, r.gamma_cool, r.m_inf, r.r_kappa_plus,
                     r.r_kappa_minus, r.r_gamma_plus, r.r_gamma_minus})
      out << format_number(v) << ',';
    out << (r.degenerate ? 1 : 0) << '\n';
  }
}

std::vector<std::pair<double, double>> resonance_curves(const SystemParams& params, double target, Branch branch,
                                                        const Axis& axis) {
  axis.check("delta_cav");
  constexpr double kTolerance = 1e-9;
  std::vector<std::pair<double, double>> points;
  const double g2 = params.g * params.g;
  for (int i = 0; i < axis.count; ++i) {
    const double dc = axis.at(i);
    // target is a root of w^2 + (delta + Delta) w + delta Delta - g^2, which
    // is linear in delta once w is fixed.
    const double slope = target + dc;
    if (slope == 0.0) continue;  // no isolated solution
    const double da = (g2 - target * target - target * dc) / slope;
    if (!std::isfinite(da)) continue;

    SystemParams p = params;
    p.delta_cav = dc;
    p.delta_atom = da;
    const DressedSpectrum s = dressed_spectrum(p);
    const double omega = branch == Branch::Plus ? s.omega_plus : s.omega_minus;
    if (std::abs(omega - target) < kTolerance) points.emplace_back(dc, da);
  }
  return points;
}

void write_resonance_csv(std::ostream& out, const std::vector<std::pair<double, double>>& points) {
  out << "delta_cav,delta_atom\n";
  for (const auto& [dc, da] : points) out << format_number(dc) << ',' << format_number(da) << '\n';
}

}  // namespace optocool

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "optocool/error.hpp"
#include "optocool/simd/kernels.hpp"
#include "optocool/sweep.hpp"

using namespace optocool;

namespace {

SystemParams cooling_map_point() {
  SystemParams p;
  p.g = 2.0;
  p.kappa = 7.0;
  p.gamma = 0.05;
  p.chi = 0.1;
  p.omega_drive = 1.0;
  return p;
}

std::string csv(const std::vector<SweepRecord>& r) {
  std::ostringstream out;
  write_sweep_csv(out, r);
  return out.str();
}

}  // namespace

TEST_CASE("axis") {
  const Axis a{-1.0, 1.0, 5};
  CHECK(a.at(0) == -1.0);
  CHECK(a.at(2) == 0.0);
  CHECK(a.at(4) == 1.0);
  CHECK_THROWS_AS((Axis{0.0, 1.0, 1}.check("x")), ValidationError);
  CHECK_THROWS_AS((Axis{1.0, 1.0, 3}.check("x")), ValidationError);
}

TEST_CASE("small grid shape and ordering") {
  const SweepGrid grid{{-1.0, 1.0, 2}, {0.0, 2.0, 2}, cooling_map_point()};
  const auto records = run_sweep(grid);
  REQUIRE(records.size() == 4);
  CHECK(records[1].delta_cav == -1.0);
  CHECK(records[1].delta_atom == 2.0);
  CHECK(records[2].delta_cav == 1.0);
  CHECK(records[2].delta_atom == 0.0);

  std::istringstream in(csv(records));
  int comments = 0, header = 0, rows = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind('#', 0) == 0)
      ++comments;
    else if (line.rfind("delta_cav,", 0) == 0)
      ++header;
    else
      ++rows;
  }
  CHECK(comments >= 1);
  CHECK(header == 1);
  CHECK(rows == 4);
}

TEST_CASE("output is independent of the thread count and kernel") {
  const SweepGrid grid{{-8.0, 8.0, 41}, {-4.0, 4.0, 37}, cooling_map_point()};
  const std::string one = csv(run_sweep(grid, 1));
  CHECK(csv(run_sweep(grid, 3)) == one);
  CHECK(csv(run_sweep(grid, 8)) == one);
  CHECK(csv(run_sweep(grid, 0)) == one);

  const simd::Isa original = simd::active_isa();
  simd::set_active_isa(simd::Isa::Scalar);
  const std::string scalar = csv(run_sweep(grid, 2));
  simd::set_active_isa(original);
  CHECK(scalar == one);
}

TEST_CASE("records are complete and the sentinel marks heating only") {
  const SweepGrid grid{{-8.0, 8.0, 33}, {-4.0, 4.0, 29}, cooling_map_point()};
  const auto records = run_sweep(grid, 2);
  CHECK(records.size() == 33u * 29u);
  int heating = 0, cooling = 0;
  for (const auto& r : records) {
    CHECK_FALSE(r.degenerate);
    if (r.gamma_cool > 0.0) {
      ++cooling;
      CHECK(r.m_inf >= 0.0);
      CHECK(r.r_kappa_plus >= 0.0);
    } else {
      ++heating;
      CHECK(r.m_inf == simd::kNoStationary);
      CHECK(r.r_gamma_minus == simd::kNoStationary);
    }
  }
  CHECK(heating > 0);
  CHECK(cooling > 0);
}

TEST_CASE("no optomechanical coupling gives zero rates everywhere") {
  SystemParams base = cooling_map_point();
  base.chi = 0.0;
  for (const auto& r : run_sweep({{-3.0, 3.0, 7}, {-3.0, 3.0, 7}, base})) {
    CHECK(r.a_plus == 0.0);
    CHECK(r.a_minus == 0.0);
    CHECK(r.gamma_cool == 0.0);
    CHECK(r.m_inf == simd::kNoStationary);
  }
}

TEST_CASE("stationary occupation map does not depend on the pump") {
  const SweepGrid cav{{-8.0, 8.0, 41}, {-4.0, 4.0, 41}, cooling_map_point()};
  SweepGrid atom = cav;
  atom.base.pump = PumpScheme::Atom;
  const auto a = run_sweep(cav);
  const auto b = run_sweep(atom);
  int compared = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].m_inf < 0.0 || b[i].m_inf < 0.0) continue;
    CHECK(std::abs(a[i].m_inf - b[i].m_inf) <= 1e-9 * a[i].m_inf);
    ++compared;
  }
  CHECK(compared > 100);
}

TEST_CASE("Stokes flux dip along delta") {
  SystemParams base;
  base.kappa = 5.0;
  base.gamma = 0.1;
  base.g = 2.0;
  base.chi = 0.1;
  base.omega_drive = 1.0;
  const Axis da{-3.0, 3.0, 121};
  const auto records = run_sweep({{0.0, 1.0, 2}, da, base});
  const double step = (da.max - da.min) / (da.count - 1);
  bool found = false;
  for (int i = 1; i + 1 < da.count; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    const auto& lo = records[static_cast<std::size_t>(i - 1)];
    const auto& hi = records[static_cast<std::size_t>(i + 1)];
    if (r.r_kappa_plus < 0.0 || lo.r_kappa_plus < 0.0 || hi.r_kappa_plus < 0.0) continue;
    if (r.r_kappa_plus < lo.r_kappa_plus && r.r_kappa_plus < hi.r_kappa_plus && std::abs(r.delta_atom - 1.0) <= step)
      found = true;
  }
  CHECK(found);
}

TEST_CASE("degenerate points are flagged and still emitted") {
  SystemParams base;
  base.kappa = 1.0;
  base.chi = 0.1;
  base.omega_drive = 1.0;
  const auto records = run_sweep({{-1.0, 1.0, 3}, {-1.0, 1.0, 3}, base});
  CHECK(records.size() == 9);
  int flagged = 0;
  for (const auto& r : records) flagged += r.degenerate;
  CHECK(flagged == 9);  // delta in {-1, 0, 1} always hits D(0) or D(+-1)
  CHECK(csv(records).find(",nan,") != std::string::npos);
}

TEST_CASE("resonance curves satisfy the dressed-state condition") {
  const SystemParams p = cooling_map_point();
  const Axis axis{-8.0, 8.0, 161};
  for (double target : {0.0, -1.0, 1.0})
    for (Branch b : {Branch::Plus, Branch::Minus}) {
      const auto pts = resonance_curves(p, target, b, axis);
      CHECK(!pts.empty());
      for (const auto& [dc, da] : pts) {
        SystemParams q = p;
        q.delta_cav = dc;
        q.delta_atom = da;
        const DressedSpectrum s = dressed_spectrum(q);
        CHECK(std::abs((b == Branch::Plus ? s.omega_plus : s.omega_minus) - target) < 1e-9);
      }
    }
}

TEST_CASE("resonance curve special points") {
  SystemParams p;
  p.g = 2.0;
  const Axis axis{-4.0, 4.0, 9};
  // Delta = delta: omega_+ = g - Delta vanishes at Delta = g
  bool symmetric = false;
  for (const auto& [dc, da] : resonance_curves(p, 0.0, Branch::Plus, axis))
    if (dc == 2.0) symmetric = std::abs(da - 2.0) < 1e-12;
  CHECK(symmetric);

  // target + Delta = 0 has no isolated solution
  for (const auto& [dc, da] : resonance_curves(p, -1.0, Branch::Minus, axis)) CHECK(dc != 1.0);

  SystemParams free;
  free.g = 0.0;
  const auto pts = resonance_curves(free, 0.0, Branch::Plus, Axis{1.0, 2.0, 2});
  REQUIRE(!pts.empty());
  CHECK(pts.front().first == 1.0);
  CHECK(pts.front().second == 0.0);
}

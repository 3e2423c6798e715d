#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "optocool/error.hpp"
#include "optocool/oracle.hpp"

namespace optocool::oracle {

namespace {

struct Projection {
  double sse = std::numeric_limits<double>::infinity();
  double offset = 0.0;     // m_inf
  double amplitude = 0.0;  // coefficient of exp(-Gamma (t - t0))
};

// For a fixed rate the model is linear in (m_inf, amplitude): solve that
// 2x2 least-squares problem exactly (variable projection).
Projection project(std::span<const double> t, std::span<const double> m, double rate) {
  const std::size_t n = t.size();
  const double t0 = t.front();
  const double span = t.back() - t0;
  // Scale the exponential to at most 1 on the window to keep the normal
  // equations well conditioned for either sign of the rate.
  const double shift = rate >= 0.0 ? 0.0 : span;
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(n), 2);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    basis(static_cast<Eigen::Index>(i), 0) = 1.0;
    basis(static_cast<Eigen::Index>(i), 1) = std::exp(-rate * (t[i] - t0 - shift));
    rhs(static_cast<Eigen::Index>(i)) = m[i];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  if (qr.rank() < 2) return {};
  const Eigen::VectorXd c = qr.solve(rhs);
  Projection p;
  p.sse = (basis * c - rhs).squaredNorm();
  p.offset = c(0);
  p.amplitude = c(1) * std::exp(rate * shift);
  return p;
}

}  // namespace

FitResult fit_cooling_rate(std::span<const double> t, std::span<const double> m, const FitOptions& options) {
  if (t.size() != m.size()) throw ValidationError("fit: time and value series differ in length");
  if (t.size() < 4) throw ValidationError("fit: need at least four samples");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw ValidationError("fit: times must be strictly increasing");

  const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
  const double range = *hi - *lo;
  const double scale = std::max(std::abs(*hi), std::abs(*lo));
  FitResult out;
  if (!(range > 1e-14 * scale) || range == 0.0) {
    out.gamma = std::numeric_limits<double>::quiet_NaN();
    out.m_inf = m.front();
    out.flagged = true;
    out.reason = "constant series: rate indeterminate";
    return out;
  }

  const double window = t.back() - t.front();
  // Coarse scan over Gamma * window on a logarithmic grid of both signs.
  std::vector<double> grid;
  constexpr int kPerDecade = 12;
  for (int k = -4 * kPerDecade; k <= 3 * kPerDecade; ++k) {
    const double x = std::pow(10.0, static_cast<double>(k) / kPerDecade);
    if (x > 600.0) break;
    grid.push_back(x);
    grid.push_back(-x);
  }
  std::sort(grid.begin(), grid.end());

  std::size_t best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double sse = project(t, m, grid[i] / window).sse;
    if (sse < best_sse) {
      best_sse = sse;
      best = i;
    }
  }
  const bool at_edge = best == 0 || best + 1 == grid.size();
  const double left = grid[best == 0 ? 0 : best - 1];
  const double right = grid[std::min(best + 1, grid.size() - 1)];

  auto objective = [&](double x) { return project(t, m, x / window).sse; };
  const auto [x_best, sse] =
      boost::math::tools::brent_find_minima(objective, left, right, std::numeric_limits<double>::digits / 2);

  const Projection p = project(t, m, x_best / window);
  out.gamma = x_best / window;
  out.m_inf = p.offset;
  out.amplitude = p.amplitude;
  out.residual = std::sqrt(sse / static_cast<double>(t.size())) / range;

  std::string reason;
  if (out.residual > options.residual_threshold) reason += "non-exponential series (residual above threshold); ";
  if (at_edge) reason += "rate not resolved by the time window; ";
  // An exponential relaxation is monotone.
  const double slack = 1e-9 * range;
  bool up = false, down = false;
  for (std::size_t i = 1; i < m.size(); ++i) {
    if (m[i] > m[i - 1] + slack) up = true;
    if (m[i] < m[i - 1] - slack) down = true;
  }
  if (up && down) reason += "non-monotone series; ";
  if (!reason.empty()) {
    out.flagged = true;
    out.reason = reason.substr(0, reason.size() - 2);
  }
  return out;
}

FitResult fit_cooling_rate(const std::vector<Sample>& series, const FitOptions& options) {
  std::vector<double> t, m;
  t.reserve(series.size());
  m.reserve(series.size());
  for (const auto& s : series) {
    t.push_back(s.t);
    m.push_back(s.obs.n_mech);
  }
  return fit_cooling_rate(t, m, options);
}

}  // namespace optocool::oracle

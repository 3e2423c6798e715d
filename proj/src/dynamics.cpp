#include "optocool/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "optocool/csv.hpp"
#include "optocool/error.hpp"
#include "optocool/simd/kernels.hpp"

namespace optocool {

namespace {
constexpr double kNormTolerance = 1e-9;
// RK4 is not positivity preserving; round-off sized undershoots are clipped.
constexpr double kNegativeSlack = 1e-12;
}  // namespace

PhononDistribution::PhononDistribution(std::vector<double> populations) : populations_(std::move(populations)) {
  if (populations_.size() < 2) throw ValidationError("phonon distribution needs truncation M >= 1");
  for (double& p : populations_) {
    if (!std::isfinite(p) || p < -kNegativeSlack) throw ValidationError("phonon populations must be non-negative");
    p = std::max(p, 0.0);
  }
  if (std::abs(total() - 1.0) > kNormTolerance)
    throw ValidationError("phonon populations must sum to 1 within 1e-9");
}

PhononDistribution PhononDistribution::fock(int m, int truncation) {
  if (truncation < 1 || m < 0 || m > truncation) throw ValidationError("fock level outside the truncated ladder");
  std::vector<double> p(static_cast<std::size_t>(truncation) + 1, 0.0);
  p[static_cast<std::size_t>(m)] = 1.0;
  return PhononDistribution(std::move(p));
}

double PhononDistribution::total() const { return std::accumulate(populations_.begin(), populations_.end(), 0.0); }

double PhononDistribution::mean() const {
  double s = 0.0;
  for (std::size_t m = 0; m < populations_.size(); ++m) s += static_cast<double>(m) * populations_[m];
  return s;
}

double PhononDistribution::top_fraction() const { return populations_.back() / total(); }

double PhononDistribution::total_variation(const PhononDistribution& other) const {
  if (other.populations_.size() != populations_.size())
    throw ValidationError("total variation needs equal truncations");
  double s = 0.0;
  for (std::size_t m = 0; m < populations_.size(); ++m) s += std::abs(populations_[m] - other.populations_[m]);
  return 0.5 * s;
}

PhononEvolution evolve_populations(const PhononRates& rates, const PhononDistribution& initial, double t_final,
                                   double dt, const EvolveOptions& options) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ValidationError("t_final must be non-negative");
  if (!(rates.a_plus >= 0.0) || !(rates.a_minus >= 0.0) || !std::isfinite(rates.a_plus + rates.a_minus))
    throw ValidationError("phonon rates must be finite and non-negative");
  const int top = initial.truncation();
  if (dt * (top * (rates.a_plus + rates.a_minus)) >= 0.1) {
    std::ostringstream msg;
    msg << "stability precondition violated: dt * M * (A+ + A-) = " << dt * (top * (rates.a_plus + rates.a_minus))
        << " >= 0.1";
    throw ValidationError(msg.str());
  }

  // Integer step count; the step shrinks slightly so the run ends on t_final.
  const auto steps = static_cast<long long>(std::ceil(t_final / dt - 1e-9));
  const double h = steps > 0 ? t_final / static_cast<double>(steps) : 0.0;

  const std::size_t n = initial.populations().size();
  std::vector<double> p = initial.populations();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const double ap = rates.a_plus;
  const double am = rates.a_minus;

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t m = 0; m < v.size(); ++m) s += static_cast<double>(m) * v[m];
    return s;
  };

  PhononEvolution result{initial, {}, {}};
  result.samples.push_back({0.0, p, mean_of(p)});

  for (long long step = 1; step <= steps; ++step) {
    simd::birth_death_rhs(ap, am, p, k1);
    for (std::size_t m = 0; m < n; ++m) tmp[m] = p[m] + 0.5 * h * k1[m];
    simd::birth_death_rhs(ap, am, tmp, k2);
    for (std::size_t m = 0; m < n; ++m) tmp[m] = p[m] + 0.5 * h * k2[m];
    simd::birth_death_rhs(ap, am, tmp, k3);
    for (std::size_t m = 0; m < n; ++m) tmp[m] = p[m] + h * k3[m];
    simd::birth_death_rhs(ap, am, tmp, k4);
    for (std::size_t m = 0; m < n; ++m) p[m] += h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);

    const bool last = step == steps;
    if (last || (options.sample_every > 0 && step % options.sample_every == 0))
      result.samples.push_back({static_cast<double>(step) * h, p, mean_of(p)});
  }

  result.final_state = PhononDistribution(p);
  if (result.final_state.top_fraction() > kTruncationTolerance) {
    std::ostringstream msg;
    msg << "truncation inadequate: p_M = " << result.final_state.top_fraction() << " exceeds " << kTruncationTolerance;
    result.warnings.push_back(msg.str());
  }
  return result;
}

StationaryPhonons stationary_distribution(const PhononRates& rates, int truncation) {
  if (truncation < 1) throw ValidationError("truncation must be >= 1");
  if (!(rates.gamma_cool() > 0.0)) throw NoStationaryState("no stationary state: Gamma <= 0 (net heating)");

  const double ratio = rates.a_plus / rates.a_minus;
  std::vector<double> p(static_cast<std::size_t>(truncation) + 1);
  p[0] = 1.0;
  for (std::size_t m = 1; m < p.size(); ++m) p[m] = p[m - 1] * ratio;
  const double norm = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= norm;

  StationaryPhonons out{PhononDistribution(std::move(p)), 0.0, rates.a_plus / rates.gamma_cool()};
  out.truncated_mean = out.distribution.mean();
  return out;
}

double mean_phonon_trajectory(const PhononRates& rates, double m0, double t) {
  const double gamma = rates.gamma_cool();
  if (gamma == 0.0) return m0 + rates.a_plus * t;
  const double m_inf = rates.a_plus / gamma;
  return m_inf + (m0 - m_inf) * std::exp(-gamma * t);
}

void write_trajectory_csv(std::ostream& out, const std::vector<PhononSample>& samples) {
  const std::size_t levels = samples.empty() ? 0 : samples.front().populations.size();
  out << "t,mean_m";
  for (std::size_t m = 0; m < levels; ++m) out << ",p_" << m;
  out << '\n';
  for (const auto& s : samples) {
    out << format_number(s.t) << ',' << format_number(s.mean);
    for (double p : s.populations) out << ',' << format_number(p);
    out << '\n';
  }
}

}  // namespace optocool

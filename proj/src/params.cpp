#include "optocool/params.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "optocool/error.hpp"

namespace optocool {

std::string_view to_string(PumpScheme pump) {
  return pump == PumpScheme::Cavity ? "cavity" : "atom";
}

PumpScheme parse_pump(std::string_view text) {
  if (text == "cavity") return PumpScheme::Cavity;
  if (text == "atom") return PumpScheme::Atom;
  throw ValidationError("pump must be 'cavity' or 'atom', got '" + std::string(text) + "'");
}

std::vector<ValidationWarning> validate(const SystemParams& p, double eta_max) {
  const std::pair<const char*, double> nonnegative[] = {
      {"g", p.g}, {"kappa", p.kappa}, {"gamma", p.gamma}, {"chi", p.chi}, {"omega_drive", p.omega_drive}};
  for (const auto& [name, value] : nonnegative) {
    if (!std::isfinite(value)) throw ValidationError(std::string(name) + " must be finite");
    if (value < 0.0) throw ValidationError(std::string(name) + " must be non-negative");
  }
  if (!std::isfinite(p.delta_cav) || !std::isfinite(p.delta_atom))
    throw ValidationError("detunings must be finite");

  std::vector<ValidationWarning> warnings;
  if (p.eta() >= eta_max) {
    std::ostringstream msg;
    msg << "perturbative regime violated: eta = " << p.eta() << " >= eta_max = " << eta_max;
    warnings.push_back({WarningCode::PerturbativeRegimeViolated, msg.str()});
  }
  if (p.g == 0.0 && p.pump == PumpScheme::Atom)
    warnings.push_back({WarningCode::NoCavityScattering,
                        "g = 0 with an atom pump: the drive cannot reach the cavity"});
  if (p.kappa == 0.0 && p.gamma == 0.0)
    warnings.push_back({WarningCode::NoDecayChannel, "kappa = gamma = 0: no decay channel"});
  return warnings;
}

DressedSpectrum dressed_spectrum(const SystemParams& p) {
  // Roots of w^2 + (delta + Delta) w + (delta Delta - g^2) = 0. The root of
  // larger magnitude comes from the closed form, the other one from the
  // product so that neither suffers cancellation.
  const double half_sum = -0.5 * (p.delta_atom + p.delta_cav);
  const double diff = p.delta_cav - p.delta_atom;
  const double half_split = 0.5 * std::sqrt(diff * diff + 4.0 * p.g * p.g);
  const double product = p.delta_atom * p.delta_cav - p.g * p.g;

  DressedSpectrum out;
  if (half_sum >= 0.0) {
    out.omega_plus = half_sum + half_split;
    out.omega_minus = out.omega_plus != 0.0 ? product / out.omega_plus : 0.0;
  } else {
    out.omega_minus = half_sum - half_split;
    out.omega_plus = product / out.omega_minus;
  }
  out.theta = std::atan2(2.0 * p.g, diff);
  return out;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& param_keys() {
  static const std::vector<std::string> keys = {"g",           "kappa",     "gamma",      "chi",
                                                "omega_drive", "delta_cav", "delta_atom", "pump"};
  return keys;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

bool is_param_key(const std::string& key) {
  for (const auto& k : param_keys())
    if (k == key) return true;
  return false;
}

}  // namespace

double parse_decimal(std::string_view key, std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ValidationError("invalid decimal for '" + std::string(key) + "': '" + std::string(text) + "'");
  return value;
}

ConfigMap parse_config(std::istream& in) {
  ConfigMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    // TOML-style section headers carry no information for a flat file.
    if (view.front() == '[') continue;

    const auto sep = view.find_first_of("=:");
    if (sep == std::string_view::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key(trim(view.substr(0, sep)));
    const std::string value(unquote(trim(view.substr(sep + 1))));
    if (!is_param_key(key))
      throw ValidationError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!out.emplace(key, value).second)
      throw ValidationError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return out;
}

ConfigMap load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in);
}

SystemParams apply_config(const ConfigMap& config, SystemParams base) {
  for (const auto& [key, value] : config) {
    if (key == "pump") {
      base.pump = parse_pump(value);
      continue;
    }
    const double v = parse_decimal(key, value);
    if (key == "g") base.g = v;
    else if (key == "kappa") base.kappa = v;
    else if (key == "gamma") base.gamma = v;
    else if (key == "chi") base.chi = v;
    else if (key == "omega_drive") base.omega_drive = v;
    else if (key == "delta_cav") base.delta_cav = v;
    else if (key == "delta_atom") base.delta_atom = v;
    else throw ValidationError("unknown parameter '" + key + "'");
  }
  return base;
}

}  // namespace optocool

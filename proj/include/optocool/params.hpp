#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace optocool {

// All frequencies and rates are dimensionless multiples of the mechanical
// frequency nu (nu == 1 throughout the library).

enum class PumpScheme { Cavity, Atom };

std::string_view to_string(PumpScheme pump);
PumpScheme parse_pump(std::string_view text);

struct SystemParams {
  double g = 0.0;            ///< atom-cavity coupling
  double kappa = 0.0;        ///< half the cavity energy loss rate (loss rate is 2*kappa)
  double gamma = 0.0;        ///< atomic spontaneous decay rate
  double chi = 0.0;          ///< single-photon optomechanical coupling
  double omega_drive = 0.0;  ///< pump rate / Rabi frequency
  double delta_cav = 0.0;    ///< laser-cavity detuning
  double delta_atom = 0.0;   ///< laser-atom detuning
  PumpScheme pump = PumpScheme::Cavity;

  /// Cavity-atom detuning, delta_atom = delta_cav + delta_ca.
  double delta_ca() const { return delta_atom - delta_cav; }
  /// Lamb-Dicke-like parameter chi / nu.
  double eta() const { return chi; }

  bool operator==(const SystemParams&) const = default;
};

inline constexpr double kDefaultEtaMax = 0.3;

enum class WarningCode { PerturbativeRegimeViolated, NoCavityScattering, NoDecayChannel };

struct ValidationWarning {
  WarningCode code;
  std::string message;
};

/// Throws ValidationError for negative or non-finite rates; returns soft
/// warnings (perturbative breakdown, missing scattering or decay channels).
std::vector<ValidationWarning> validate(const SystemParams& params, double eta_max = kDefaultEtaMax);

/// Dressed states of the single-excitation atom-cavity manifold.
struct DressedSpectrum {
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  double theta = 0.0;  ///< mixing angle in [0, pi]
};

DressedSpectrum dressed_spectrum(const SystemParams& params);

// ---------------------------------------------------------------------------
// Flat key-value configuration ("key = value", '#' comments).

/// Raw key/value pairs. Unknown keys and duplicate keys are rejected.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config(std::istream& in);
ConfigMap load_config(const std::string& path);

/// Applies every recognized key in `config` on top of `base`.
SystemParams apply_config(const ConfigMap& config, SystemParams base = {});

/// Keys accepted in the configuration file, in canonical order.
const std::vector<std::string>& param_keys();

double parse_decimal(std::string_view key, std::string_view text);

}  // namespace optocool

#pragma once

#include "biphoton/analysis.hpp"
#include "biphoton/detection.hpp"
#include "biphoton/dispersion.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/polarization.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace biphoton {

/// One experiment, in SI units. Defaults reproduce the 240 m fibre without polarizers.
struct ExperimentConfig {
  double crystal_length = 0.5e-3;            ///< m
  double inverse_gv_difference = 0.16e-9;    ///< s/m (0.16 ps/mm)
  double pump_wavelength = 351e-9;           ///< m
  double fiber_length = 240.0;               ///< m
  double k_prime = 0.0;                      ///< s/m
  double k_double_prime = 3.2e-26;           ///< s^2/m (3.2e-28 s^2/cm)
  std::vector<double> plate_delays;          ///< signed, s
  std::optional<double> kappa;               ///< alternative to plate_delays
  double theta1 = 0.0;                       ///< rad
  double theta2 = 0.0;                       ///< rad
  AnalyzerMode analyzer_mode = AnalyzerMode::none;
  DetectionChain chain;
  std::int64_t grid_samples = 1 << 14;
  std::optional<double> grid_omega_max;      ///< rad/s; default 40 pi / (D L)
  double drift_visibility = 1.0;
  std::uint64_t seed = 1;

  bool operator==(const ExperimentConfig&) const = default;

  SpdcSource source() const;
  FiberChannel fiber() const;
  DelayState delay() const;
  AnalyzerSettings settings() const;
  FrequencyGrid grid() const;
  Setup setup() const;
  FitContext fit_context() const;
  /// Re-checks every invariant; throws ConfigError listing all failures.
  void validate() const;
};

/// Every problem found while parsing, each prefixed by its line number.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const char* kind() const noexcept override { return "config"; }
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// `key = value unit` lines, `[section]` headers or dotted keys, `#` comments.
/// Missing keys keep their defaults; an empty text yields the default config.
ExperimentConfig parse_config(const std::string& text);
/// Emits every key with SI units and round-trip precision.
std::string format_config(const ExperimentConfig& config);

/// Flattened `config.<key>` entries for histogram headers, and the inverse.
Metadata config_metadata(const ExperimentConfig& config);
ExperimentConfig config_from_metadata(const Metadata& metadata);

std::string to_string(AnalyzerMode mode);

/// Physical value with unit, e.g. "750 ps", "45deg", "3.2e-28 s^2/cm". `dimension` is one
/// of time, length, angle, dispersion (s/m), gvd (s^2/m), frequency (rad/s).
/// Throws DomainError on a unit mismatch or malformed number.
double parse_quantity(const std::string& text, const std::string& dimension);

struct Preset {
  std::string id;
  std::string description;
  ExperimentConfig config;
  std::optional<ModelFamily> fit_family;  ///< family the figure is fitted with, if any
};

/// Figure presets: fig3a fig3b fig4a fig4b fig5a fig5b fig6 fig7a..fig7d fig8a..fig8c.
const std::vector<Preset>& presets();
/// Throws ContractViolation for an unknown id.
const Preset& preset(const std::string& id);

}  // namespace biphoton

#pragma once

#include "biphoton/detection.hpp"
#include "biphoton/dispersion.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/polarization.hpp"
#include "biphoton/source.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace biphoton {

/// Everything that shapes the coincidence-rate curve before detection.
struct Setup {
  SpdcSource source = default_source();
  FiberChannel fiber;
  DelayState delay = delay_for_kappa(default_source(), 1.0);
  AnalyzerSettings settings;
  double drift_visibility = 1.0;

  /// Spread G2 at shifted time tau'. Without dispersion the unspread peak (a few tens of
  /// femtoseconds) is replaced by a unit-area-preserving box `resolution` wide, since it
  /// cannot be resolved by any detection grid.
  double g2(double tau_prime, double resolution = 0.0) const;
  CoincidenceModel model(double resolution) const;
  Setup with_settings(const AnalyzerSettings& s) const;
};

/// Jitter-convolved G2 on model_axis(chain, oversample) (arbitrary units, not normalised).
Profile convolved_g2(const Setup& setup, const DetectionChain& chain, int oversample = 15);

struct Window {
  double center = 0.0;
  double width = 0.0;
};

// ---------------------------------------------------------------------------------------
// Fitting

enum class ModelFamily {
  plain,  ///< unpolarized spread peak: position, height, k'', background
  gpm,    ///< G+- with the recorded analyzer angles; adds the visibility factor
  plate,  ///< G+- with free modulation rescaling kappa and visibility factor
};

ModelFamily parse_model_family(const std::string& name);
std::string to_string(ModelFamily family);

/// Apparatus facts the fit does not estimate.
struct FitContext {
  SpdcSource source = default_source();
  double fiber_length = 0.0;  ///< m
  double jitter_fwhm = 750e-12;
  AnalyzerSettings settings = AnalyzerSettings::plus();  ///< used by gpm and plate
};

struct FitParameter {
  std::string name;
  double value = 0.0;
  double sigma = 0.0;
};

struct FitResult {
  ModelFamily family = ModelFamily::plain;
  double peak_position = 0.0;       ///< s
  double peak_height = 0.0;         ///< counts per channel of the unsmeared peak
  double gvd_k_double_prime = 0.0;  ///< s^2/m
  double background = 0.0;          ///< counts per channel
  std::optional<double> modulation_kappa;
  std::optional<double> drift_visibility;
  double residual_chi2_per_dof = 0.0;
  std::vector<FitParameter> parameters;  ///< values and 1 sigma, in fit order
  double fitted_fwhm = 0.0;              ///< of the jitter-convolved fitted peak, above background
  int iterations = 0;
  bool converged = false;
  Eigen::ArrayXd model_counts;  ///< fitted counts per channel

  double sigma(const std::string& name) const;
};

/// Raised when the optimiser exhausts its iterations; carries the best point found.
class FitNotConverged : public Error {
 public:
  FitNotConverged(const std::string& what, FitResult best) : Error(what), best_(std::move(best)) {}
  const char* kind() const noexcept override { return "not_converged"; }
  const FitResult& best() const { return best_; }

 private:
  FitResult best_;
};

struct FitOptions {
  int max_iterations = 200;
  double parameter_tolerance = 1e-6;  ///< relative
  double chi2_tolerance = 1e-9;       ///< relative
  int oversample = 4;                 ///< model points per channel
};

/// Poisson-weighted (variance = max(count, 1)) damped least-squares fit of the chosen
/// family convolved with the detector jitter. Starting values are derived from the data.
/// Throws ContractViolation for too few channels or an empty histogram, RankDeficiencyError
/// for a histogram without a peak, FitNotConverged when the iteration budget runs out.
FitResult fit_spread_peak(const CoincidenceHistogram& hist, ModelFamily family, const FitContext& context,
                          const FitOptions& options = {});

/// Key = value report; k'' is written in s^2/cm.
std::string format_fit_report(const FitResult& fit);

// ---------------------------------------------------------------------------------------
// Interference observables

/// (max - min) / (max + min). Throws UndefinedVisibility for max = min = 0 and
/// ContractViolation unless max >= min >= 0.
double visibility(double counts_max, double counts_min);

struct CenterRatio {
  double ratio = 0.0;
  bool infinite = false;
};

/// Window-integrated G+ over G- (point values for a zero-width window).
CenterRatio center_ratio(const Profile& g2_plus, const Profile& g2_minus, const Window& window);

struct FringePoint {
  double theta1 = 0.0;
  double expected = 0.0;
  std::int64_t sampled = 0;
};

/// Window counts versus theta1 with theta2 fixed. `counts_per_setting` is the count the
/// same window would collect with the analyzers removed; expected values scale it by
/// the window-integrated ratio of analysed to unanalysed jitter-convolved G2, and the
/// sampled values are Poisson draws.
std::vector<FringePoint> fringe_scan(const Setup& setup, const DetectionChain& chain,
                                     const std::vector<double>& theta1_values, double theta2,
                                     const Window& window, double counts_per_setting, std::uint64_t seed);

/// Fringe visibility over a scan (from expected values unless `sampled`).
double scan_visibility(const std::vector<FringePoint>& scan, bool sampled = false);

// ---------------------------------------------------------------------------------------
// Bell statistic

struct AccidentalEstimates {
  double n_theta = 0.0;
  double n_3theta = 0.0;
  double n_inf = 0.0;
};

struct BellResult {
  double n_theta = 0.0;   ///< after accidental subtraction
  double n_3theta = 0.0;
  double n_inf = 0.0;
  double theta = 0.0;
  double R = 0.0;
  double sigma_R = 0.0;
  bool accidentals_subtracted = false;
  bool clamped = false;  ///< a count went negative after subtraction and was set to zero

  bool violates_classical_bound() const { return R - sigma_R > 0.25; }
};

/// R = (N(theta) - N(3 theta)) / N(inf) with first-order Poisson error from the raw counts.
BellResult bell_R(double n_theta, double n_3theta, double n_inf, double theta,
                  const std::optional<AccidentalEstimates>& accidentals = std::nullopt);

/// theta1 giving relative angle `theta` against theta2 (maximum at theta = 0).
double bell_theta1(double theta, double theta2);

struct BellExperiment {
  double theta = 30.0 * 3.14159265358979323846 / 180.0;
  double theta2 = 45.0 * 3.14159265358979323846 / 180.0;
  Window window{0.0, 0.43e-9};
  std::int64_t pairs_per_setting = 1'000'000;  ///< pairs reaching the analyzers per setting
  bool subtract_accidentals = true;
};

/// Monte Carlo of the three settings: Poisson-distributed transmitted pairs per setting,
/// simulated histograms, window counts, then bell_R. N(inf) uses the same window.
BellResult simulate_bell(const Setup& setup, const DetectionChain& chain, const BellExperiment& experiment,
                         std::uint64_t seed, unsigned threads = 0);

/// Noise-free counterpart of simulate_bell (expected window counts, sigma from them).
BellResult expected_bell(const Setup& setup, const DetectionChain& chain, const BellExperiment& experiment);

// ---------------------------------------------------------------------------------------

/// Full width at half of (max - background), walking out from the global maximum and
/// interpolating linearly. Throws RangeError when a side has no crossing.
double fwhm(const Profile& profile, double background = 0.0);

}  // namespace biphoton

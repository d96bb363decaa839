#pragma once

#include "biphoton/grid.hpp"
#include "biphoton/source.hpp"

#include <complex>
#include <functional>
#include <span>

namespace biphoton {

enum class AnalyzerMode {
  none,                  ///< no polarization selection; coincidences of both H/V orderings add
  two_polarizers,        ///< one polarizer per beamsplitter output
  single_polarizer,      ///< one prism before the fibre; acts as theta1 = theta2
};

/// Polarizer angles, reduced to (-pi/2, pi/2].
class AnalyzerSettings {
 public:
  AnalyzerSettings() = default;
  /// Throws ContractViolation for single_polarizer with theta1 != theta2.
  AnalyzerSettings(double theta1, double theta2, AnalyzerMode mode = AnalyzerMode::two_polarizers);

  static AnalyzerSettings unpolarized() { return AnalyzerSettings(0.0, 0.0, AnalyzerMode::none); }
  /// theta1 = theta2 = 45 deg (constructive) or theta1 = -45, theta2 = 45 deg (destructive).
  static AnalyzerSettings plus();
  static AnalyzerSettings minus();

  double theta1() const { return theta1_; }
  double theta2() const { return theta2_; }
  AnalyzerMode mode() const { return mode_; }

  bool operator==(const AnalyzerSettings&) const = default;

 private:
  double theta1_ = 0.0;
  double theta2_ = 0.0;
  AnalyzerMode mode_ = AnalyzerMode::none;
};

/// Maps an angle into (-pi/2, pi/2]; polarizer angles are defined modulo pi.
double reduce_polarizer_angle(double theta);

enum class PlateOrientation {
  parallel,    ///< optic axis parallel to the crystal's: reduces the e-o delay (delay < 0)
  orthogonal,  ///< increases the e-o delay (delay > 0)
};

struct BirefringentPlate {
  double delay = 0.0;  ///< signed, seconds
  PlateOrientation orientation = PlateOrientation::orthogonal;

  /// Throws ContractViolation if the sign of `delay` disagrees with `orientation`.
  static BirefringentPlate make(double delay, PlateOrientation orientation);
  /// Orientation inferred from the sign of the delay.
  static BirefringentPlate from_signed_delay(double delay);

  bool operator==(const BirefringentPlate&) const = default;
};

/// Effective e-o delay after the plates; kappa = tau0_eff / tau0.
struct DelayState {
  double tau0 = 0.0;
  double tau0_eff = 0.0;
  double kappa = 1.0;
};

DelayState effective_delay(const SpdcSource& source, std::span<const BirefringentPlate> plates);
/// Delay state for a prescribed kappa; tau0_eff = kappa * tau0.
DelayState delay_for_kappa(const SpdcSource& source, double kappa);

/// F'(Omega) = F(Omega) { sin(t1 + t2) cos(Omega tau0_eff) - i sin(t1 - t2) sin(Omega tau0_eff) }.
/// Throws ContractViolation unless the mode has polarizers after the beamsplitter
/// (single_polarizer is accepted since theta1 = theta2 there).
std::complex<double> project_polarizers(const SpdcSource& source, const AnalyzerSettings& settings,
                                        const DelayState& delay, double omega);

/// Projection applied to an arbitrary spectral amplitude sample F(Omega).
std::complex<double> projection_factor(const AnalyzerSettings& settings, const DelayState& delay,
                                       double omega);

/// F'(tau) = cos t1 sin t2 F(tau + tau0_eff) + cos t2 sin t1 F(tau - tau0_eff),
/// with F the analytic rectangle unless another temporal amplitude is supplied.
std::complex<double> temporal_superposition(const SpdcSource& source, const AnalyzerSettings& settings,
                                            const DelayState& delay, double tau);
std::complex<double> temporal_superposition(const std::function<std::complex<double>(double)>& amplitude,
                                            const AnalyzerSettings& settings, const DelayState& delay,
                                            double tau);

/// Projects every sample of a spectral amplitude.
SampledAmplitude project(const SampledAmplitude& spectral, const AnalyzerSettings& settings,
                         const DelayState& delay);

/// Sampled temporal superposition; shifts are exact when tau0_eff is a multiple of the
/// time step and linearly interpolated otherwise. Samples shifted in from outside the
/// axis wrap periodically, matching the discrete Fourier pairing.
SampledAmplitude superpose(const SampledAmplitude& temporal, const AnalyzerSettings& settings,
                           const DelayState& delay);

}  // namespace biphoton

#include "biphoton/polarization.hpp"

#include "biphoton/errors.hpp"
#include "biphoton/units.hpp"

#include <cmath>
#include <numbers>

namespace biphoton {

double reduce_polarizer_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  double r = std::fmod(theta, pi);
  if (r <= -pi / 2) r += pi;
  if (r > pi / 2) r -= pi;
  return r;
}

AnalyzerSettings::AnalyzerSettings(double theta1, double theta2, AnalyzerMode mode)
    : theta1_(reduce_polarizer_angle(theta1)), theta2_(reduce_polarizer_angle(theta2)), mode_(mode) {
  if (mode == AnalyzerMode::single_polarizer && std::abs(theta1_ - theta2_) > 1e-12)
    throw ContractViolation("analyzer: a single polarizer needs theta1 == theta2");
}

AnalyzerSettings AnalyzerSettings::plus() { return {45.0 * units::deg, 45.0 * units::deg}; }
AnalyzerSettings AnalyzerSettings::minus() { return {-45.0 * units::deg, 45.0 * units::deg}; }

BirefringentPlate BirefringentPlate::make(double delay, PlateOrientation orientation) {
  if ((orientation == PlateOrientation::parallel && delay > 0.0) ||
      (orientation == PlateOrientation::orthogonal && delay < 0.0))
    throw ContractViolation("plate: delay sign inconsistent with orientation");
  return {delay, orientation};
}

BirefringentPlate BirefringentPlate::from_signed_delay(double delay) {
  return {delay, delay < 0.0 ? PlateOrientation::parallel : PlateOrientation::orthogonal};
}

DelayState effective_delay(const SpdcSource& source, std::span<const BirefringentPlate> plates) {
  double sum = 0.0;
  for (const auto& p : plates) sum += p.delay;
  const double t0 = source.tau0();
  return {t0, t0 + sum, (t0 + sum) / t0};
}

DelayState delay_for_kappa(const SpdcSource& source, double kappa) {
  const double t0 = source.tau0();
  return {t0, kappa * t0, kappa};
}

std::complex<double> projection_factor(const AnalyzerSettings& settings, const DelayState& delay,
                                       double omega) {
  if (settings.mode() == AnalyzerMode::none)
    throw ContractViolation("projection requires polarizers");
  const double t1 = settings.theta1();
  const double t2 = settings.theta2();
  const double phase = omega * delay.tau0_eff;
  return {std::sin(t1 + t2) * std::cos(phase), -std::sin(t1 - t2) * std::sin(phase)};
}

std::complex<double> project_polarizers(const SpdcSource& source, const AnalyzerSettings& settings,
                                        const DelayState& delay, double omega) {
  return sinc_spectral_amplitude(source, omega) * projection_factor(settings, delay, omega);
}

std::complex<double> temporal_superposition(const std::function<std::complex<double>(double)>& amplitude,
                                            const AnalyzerSettings& settings, const DelayState& delay,
                                            double tau) {
  if (settings.mode() == AnalyzerMode::none)
    throw ContractViolation("temporal_superposition requires polarizers");
  const double t1 = settings.theta1();
  const double t2 = settings.theta2();
  return std::cos(t1) * std::sin(t2) * amplitude(tau + delay.tau0_eff) +
         std::cos(t2) * std::sin(t1) * amplitude(tau - delay.tau0_eff);
}

std::complex<double> temporal_superposition(const SpdcSource& source, const AnalyzerSettings& settings,
                                            const DelayState& delay, double tau) {
  return temporal_superposition(
      [&source](double t) { return temporal_amplitude_analytic(source, t); }, settings, delay, tau);
}

SampledAmplitude project(const SampledAmplitude& spectral, const AnalyzerSettings& settings,
                         const DelayState& delay) {
  if (spectral.domain != Domain::spectral) throw ContractViolation("project: expected spectral amplitude");
  SampledAmplitude out = spectral;
  for (Eigen::Index k = 0; k < out.values.size(); ++k)
    out.values[k] *= projection_factor(settings, delay, spectral.axis[k]);
  return out;
}

namespace {

// Value at tau = axis[i] + offset with periodic wrap and linear interpolation.
std::complex<double> shifted_sample(const SampledAmplitude& a, Eigen::Index i, double offset) {
  const Eigen::Index n = a.values.size();
  const double steps = offset / a.axis.step;
  const double whole = std::round(steps);
  auto wrap = [n](Eigen::Index k) { return ((k % n) + n) % n; };
  if (std::abs(steps - whole) < 1e-9) return a.values[wrap(i + static_cast<Eigen::Index>(whole))];
  const double fl = std::floor(steps);
  const double frac = steps - fl;
  const Eigen::Index k = i + static_cast<Eigen::Index>(fl);
  return (1.0 - frac) * a.values[wrap(k)] + frac * a.values[wrap(k + 1)];
}

}  // namespace

SampledAmplitude superpose(const SampledAmplitude& temporal, const AnalyzerSettings& settings,
                           const DelayState& delay) {
  if (temporal.domain != Domain::temporal) throw ContractViolation("superpose: expected temporal amplitude");
  if (settings.mode() == AnalyzerMode::none) throw ContractViolation("superpose requires polarizers");
  const double t1 = settings.theta1();
  const double t2 = settings.theta2();
  const double a = std::cos(t1) * std::sin(t2);
  const double b = std::cos(t2) * std::sin(t1);
  SampledAmplitude out = temporal;
  for (Eigen::Index i = 0; i < out.values.size(); ++i)
    out.values[i] = a * shifted_sample(temporal, i, delay.tau0_eff) +
                    b * shifted_sample(temporal, i, -delay.tau0_eff);
  return out;
}

}  // namespace biphoton

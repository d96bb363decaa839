#include "biphoton/source.hpp"

#include "biphoton/errors.hpp"
#include "biphoton/fourier.hpp"
#include "biphoton/units.hpp"

#include <numbers>

namespace biphoton {

SpdcSource::SpdcSource(double crystal_length_m, double inverse_gv_difference_s_per_m,
                       double degenerate_angular_frequency)
    : length_(crystal_length_m), d_(inverse_gv_difference_s_per_m),
      omega0_(degenerate_angular_frequency) {
  if (!(crystal_length_m > 0.0) || !std::isfinite(crystal_length_m))
    throw ContractViolation("source: crystal length must be positive");
  if (inverse_gv_difference_s_per_m == 0.0 || !std::isfinite(inverse_gv_difference_s_per_m))
    throw ContractViolation("source: inverse group-velocity difference must be nonzero");
}

SpdcSource default_source() {
  const double pump_wavelength = 351.0 * units::nm;
  const double omega_pump = 2.0 * std::numbers::pi * units::speed_of_light / pump_wavelength;
  return SpdcSource(0.5 * units::mm, 0.16 * units::ps / units::mm, omega_pump / 2.0);
}

std::complex<double> sinc_spectral_amplitude(const SpdcSource& source, double omega) {
  return sinc(source.tau0() * omega);
}

std::complex<double> temporal_amplitude_analytic(const SpdcSource& source, double tau) {
  const double t0 = std::abs(source.tau0());
  const double height = 1.0 / (2.0 * t0);
  const double a = std::abs(tau);
  if (a < t0) return height;
  if (a == t0) return height / 2.0;
  return 0.0;
}

double g1(const SpdcSource& source, double tau) {
  const double base = 2.0 * std::abs(source.tau0());
  return std::max(0.0, 1.0 - std::abs(tau) / base);
}

Profile g1_sampled(const SampledAmplitude& spectral) {
  if (spectral.domain != Domain::spectral)
    throw ContractViolation("g1_sampled: expected a spectral amplitude");
  SampledAmplitude power{Domain::spectral, spectral.axis, spectral.values.abs2().cast<std::complex<double>>()};
  const SampledAmplitude corr = to_time_domain(power);
  const Eigen::Index origin = corr.axis.size / 2;
  const double at_zero = corr.values[origin].real();
  if (!(at_zero > 0.0)) throw ContractViolation("g1_sampled: zero spectral power");
  return Profile{corr.axis, corr.values.real() / at_zero};
}

FrequencyGrid default_grid(const SpdcSource& source) {
  const double dl = std::abs(source.inverse_gv_difference() * source.crystal_length());
  return FrequencyGrid(Eigen::Index{1} << 14, 40.0 * std::numbers::pi / dl);
}

}  // namespace biphoton

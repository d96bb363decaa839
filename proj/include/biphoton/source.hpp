#pragma once

#include "biphoton/grid.hpp"

#include <Eigen/Core>

#include <cmath>
#include <complex>

namespace biphoton {

/// sin(x)/x with the removable singularity handled by its Taylor series.
template <typename Scalar>
Scalar sinc(Scalar x) {
  using std::abs;
  using std::sin;
  if (abs(x) < Scalar(1e-4)) {
    const Scalar x2 = x * x;
    return Scalar(1) - x2 / Scalar(6) + x2 * x2 / Scalar(120);
  }
  return sin(x) / x;
}

/// Coefficient-wise sinc for Eigen arrays and expressions.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> sinc(const Eigen::ArrayBase<Derived>& x) {
  return x.unaryExpr([](typename Derived::Scalar v) { return sinc(v); });
}

/// Type-II crystal: length L and inverse group-velocity difference D = 1/u_o - 1/u_e.
class SpdcSource {
 public:
  /// Throws ContractViolation unless L > 0 and D != 0.
  SpdcSource(double crystal_length_m, double inverse_gv_difference_s_per_m,
             double degenerate_angular_frequency = 0.0);

  double crystal_length() const { return length_; }
  double inverse_gv_difference() const { return d_; }
  /// omega_p / 2; carried for bookkeeping only.
  double degenerate_angular_frequency() const { return omega0_; }
  /// e-o delay tau0 = D L / 2, always recomputed.
  double tau0() const { return d_ * length_ / 2.0; }

  bool operator==(const SpdcSource&) const = default;

 private:
  double length_;
  double d_;
  double omega0_;
};

/// Reference crystal: 0.5 mm BBO with D = 0.16 ps/mm (tau0 = 40 fs), pumped at 351 nm.
SpdcSource default_source();

/// F(Omega) = sin(D L Omega / 2) / (D L Omega / 2).
std::complex<double> sinc_spectral_amplitude(const SpdcSource& source, double omega);

/// Rectangle of width 2 tau0 and unit area; half height exactly at |tau| = tau0.
std::complex<double> temporal_amplitude_analytic(const SpdcSource& source, double tau);

/// Normalised first-order correlation of the sinc source: the triangle 1 - |tau| / (2 tau0).
double g1(const SpdcSource& source, double tau);

/// g1 from a sampled spectral amplitude: transform of |F(Omega)|^2, scaled to 1 at tau = 0.
Profile g1_sampled(const SampledAmplitude& spectral);

/// Grid with omega_max = 40 pi / (D L) and 2^14 samples.
FrequencyGrid default_grid(const SpdcSource& source);

}  // namespace biphoton

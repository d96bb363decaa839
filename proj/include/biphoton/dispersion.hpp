#pragma once

#include "biphoton/fourier.hpp"
#include "biphoton/polarization.hpp"
#include "biphoton/source.hpp"

#include <Eigen/Core>

#include <complex>

namespace biphoton {

/// Fibre of length z with group delay k' and GVD k'' (SI: s/m and s^2/m).
/// Signal and idler share one (k', k'') pair; for unequal photons pass the arithmetic means.
class FiberChannel {
 public:
  FiberChannel() = default;
  /// Throws ContractViolation for z < 0 or non-finite coefficients.
  FiberChannel(double length_m, double k_prime, double k_double_prime);

  double length() const { return z_; }
  double k_prime() const { return k1_; }
  double k_double_prime() const { return k2_; }
  /// k'' z, the quantity every spreading formula depends on.
  double gvd_product() const { return k2_ * z_; }
  /// Constant group delay k' z removed from the time axis.
  double group_delay() const { return k1_ * z_; }

  bool operator==(const FiberChannel&) const = default;

 private:
  double z_ = 0.0;
  double k1_ = 0.0;
  double k2_ = 0.0;
};

/// k'' = 3.2e-28 s^2/cm, k' = 0, with the given length.
FiberChannel reference_fiber(double length_m);

struct SpreadScale {
  double tau_f = 0.0;      ///< 2 k'' z / tau0_eff
  double tau_shift = 0.0;  ///< k' z
};

/// Throws DomainError when tau0_eff = 0 (full compensation has no envelope scale of its own).
SpreadScale spread_scale(const SpdcSource& source, const FiberChannel& fiber, const DelayState& delay);

/// Multiplies a spectral amplitude by the two-photon dispersive phase exp(-i k'' z Omega^2).
/// Each photon contributes k''Omega^2 z / 2; the k' terms are a pure delay and are not applied.
SampledAmplitude apply_dispersion(const SampledAmplitude& spectral, const FiberChannel& fiber);

enum class PropagationRoute {
  direct,  ///< phase then transform; output on the conjugate time grid
  scaled,  ///< Fresnel transfer-function route; output on tau = 2 k''z Omega
};

struct Propagated {
  SampledAmplitude amplitude;  ///< temporal, axis in shifted time tau' = tau - k' z
  double tau_shift = 0.0;      ///< k' z
  PropagationRoute route = PropagationRoute::direct;
};

/// Exact propagation through the quadratic spectral phase, returned in the time domain.
/// The route is picked so the chirp is sampled without aliasing; a ResolutionError is
/// raised when the spread peak (2 |k''z| x spectral FWHM) exceeds 80% of the output span
/// or is covered by fewer than four output samples.
Propagated propagate_exact(const SampledAmplitude& spectral, const FiberChannel& fiber);

/// Far-field amplitude (4 pi i k''z)^{-1/2} exp(i tau'^2 / (4 k''z)) f(tau' / (2 k''z)).
/// Throws DomainError for k''z = 0.
std::complex<double> propagate_farfield(const SpectralFunction& f, const FiberChannel& fiber,
                                        double tau_prime);

/// True when tau_f >= 10 tau0_eff, where the far-field and simplified G2 forms apply.
bool far_field_valid(const SpdcSource& source, const FiberChannel& fiber, const DelayState& delay);

enum class Sign { plus, minus };

/// Spread second-order correlation for arbitrary analyzer settings (arbitrary units;
/// G+ -> 1 at tau' = 0 for drift_visibility = 1, unpolarized -> 2 sinc^2).
/// With tau_f >= 10 tau0_eff:
///   sinc^2(x) [ c2^2 s1^2 + c1^2 s2^2 + 2 V c1 c2 s1 s2 cos(2 kappa x) ],  x = tau'/tau_f;
/// otherwise the two shifted far-field amplitudes with their quadratic phases are summed
/// and the cross term is scaled by V. tau_f always uses the uncompensated tau0.
double g2_spread(const SpdcSource& source, const FiberChannel& fiber, const DelayState& delay,
                 const AnalyzerSettings& settings, double drift_visibility, double tau_prime);

/// G+- without plates: sin^2 cos^2 / x^2 and sin^4 / x^2 (cross term scaled by V).
double g2_pm_analytic(const SpdcSource& source, const FiberChannel& fiber, Sign sign,
                      double drift_visibility, double tau_prime);

/// G+- with plates: sin^2(x) cos^2(kappa x) / x^2 and sin^2(x) sin^2(kappa x) / x^2.
double g2_plate_analytic(const SpdcSource& source, const FiberChannel& fiber, const DelayState& delay,
                         Sign sign, double drift_visibility, double tau_prime);

/// Unpolarized spread peak sinc^2(tau'/tau_f), normalised to 1 at the centre.
double g2_unpolarized(const SpdcSource& source, const FiberChannel& fiber, double tau_prime);

/// Coefficient-wise evaluation over an array of shifted times.
template <typename Derived>
Eigen::ArrayXd g2_spread(const SpdcSource& source, const FiberChannel& fiber, const DelayState& delay,
                         const AnalyzerSettings& settings, double drift_visibility,
                         const Eigen::ArrayBase<Derived>& tau_prime) {
  Eigen::ArrayXd out(tau_prime.size());
  for (Eigen::Index i = 0; i < tau_prime.size(); ++i)
    out[i] = g2_spread(source, fiber, delay, settings, drift_visibility, tau_prime.derived()[i]);
  return out;
}

}  // namespace biphoton

#include "biphoton/dispersion.hpp"

#include "biphoton/errors.hpp"
#include "biphoton/units.hpp"

#include <cmath>
#include <numbers>

namespace biphoton {

namespace {
constexpr double pi = std::numbers::pi;
constexpr std::complex<double> I{0.0, 1.0};
}  // namespace

FiberChannel::FiberChannel(double length_m, double k_prime, double k_double_prime)
    : z_(length_m), k1_(k_prime), k2_(k_double_prime) {
  if (!(length_m >= 0.0) || !std::isfinite(length_m))
    throw ContractViolation("fiber: length must be >= 0");
  if (!std::isfinite(k_prime) || !std::isfinite(k_double_prime))
    throw ContractViolation("fiber: dispersion coefficients must be finite");
}

FiberChannel reference_fiber(double length_m) {
  return FiberChannel(length_m, 0.0, 3.2e-28 * units::s * units::s / units::cm);
}

SpreadScale spread_scale(const SpdcSource& /*source*/, const FiberChannel& fiber, const DelayState& delay) {
  if (delay.tau0_eff == 0.0)
    throw DomainError("spread_scale: tau0_eff = 0, use the kappa = 0 closed forms");
  return {2.0 * fiber.gvd_product() / delay.tau0_eff, fiber.group_delay()};
}

SampledAmplitude apply_dispersion(const SampledAmplitude& spectral, const FiberChannel& fiber) {
  if (spectral.domain != Domain::spectral)
    throw ContractViolation("apply_dispersion: expected a spectral amplitude");
  const double a = fiber.gvd_product();
  SampledAmplitude out = spectral;
  for (Eigen::Index k = 0; k < out.values.size(); ++k) {
    const double w = spectral.axis[k];
    out.values[k] *= std::polar(1.0, -a * w * w);
  }
  return out;
}

namespace {

// Width between the outermost half-maximum crossings of |F(Omega)|^2.
double spectral_power_fwhm(const SampledAmplitude& a) {
  const Eigen::ArrayXd p = a.values.abs2();
  const double half = p.maxCoeff() / 2.0;
  Eigen::Index lo = 0, hi = p.size() - 1;
  while (lo < p.size() && p[lo] < half) ++lo;
  while (hi >= 0 && p[hi] < half) --hi;
  if (lo > hi) return 0.0;
  auto crossing = [&](Eigen::Index inside, Eigen::Index outside) {
    if (outside < 0 || outside >= p.size()) return a.axis[inside];
    const double f = (p[inside] - half) / (p[inside] - p[outside]);
    return a.axis[inside] + f * (a.axis[outside] - a.axis[inside]);
  };
  return crossing(hi, hi + 1) - crossing(lo, lo - 1);
}

}  // namespace

Propagated propagate_exact(const SampledAmplitude& spectral, const FiberChannel& fiber) {
  if (spectral.domain != Domain::spectral)
    throw ContractViolation("propagate_exact: expected a spectral amplitude");
  const Eigen::Index n = spectral.axis.size;
  const double domega = spectral.axis.step;
  const double omega_max = domega * static_cast<double>(n) / 2.0;
  const double a = fiber.gvd_product();
  const double abs_a = std::abs(a);
  const double spread = 2.0 * abs_a * spectral_power_fwhm(spectral);

  // Chirp is resolved on the spectral grid below this product, on the time grid above it.
  const double crossover = pi * static_cast<double>(n) / (4.0 * omega_max * omega_max);

  if (abs_a <= crossover) {
    Propagated out{to_time_domain(apply_dispersion(spectral, fiber)), fiber.group_delay(),
                   PropagationRoute::direct};
    const double span = static_cast<double>(n) * out.amplitude.axis.step;
    if (spread > 0.8 * span)
      throw ResolutionError("propagate_exact: spread peak exceeds 80% of the time-grid span");
    return out;
  }

  const SampledAmplitude before = to_time_domain(spectral);
  SampledAmplitude chirped = before;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = before.axis[j];
    chirped.values[j] *= std::polar(1.0, s * s / (4.0 * a));
  }
  const SampledAmplitude conv = to_frequency_domain(chirped);
  const std::complex<double> prefactor = std::sqrt(pi / (I * a)) / (2.0 * pi);

  const double step = 2.0 * abs_a * domega;
  SampledAmplitude result{Domain::temporal, UniformAxis::centered(n, step), Eigen::ArrayXcd(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const double w = conv.axis[k];
    const std::complex<double> v = std::polar(1.0, a * w * w) * prefactor * conv.values[k];
    // tau = 2 a Omega; for anomalous dispersion the axis runs backwards.
    const Eigen::Index j = a > 0.0 ? k : (n - k) % n;
    result.values[j] = v;
  }

  const double span = static_cast<double>(n) * step;
  if (spread > 0.8 * span)
    throw ResolutionError("propagate_exact: spread peak exceeds 80% of the time-grid span");
  if (spread < 4.0 * step)
    throw ResolutionError("propagate_exact: spread peak covered by fewer than four samples");
  return {std::move(result), fiber.group_delay(), PropagationRoute::scaled};
}

std::complex<double> propagate_farfield(const SpectralFunction& f, const FiberChannel& fiber,
                                        double tau_prime) {
  const double a = fiber.gvd_product();
  if (a == 0.0) throw DomainError("propagate_farfield: k''z = 0");
  const std::complex<double> prefactor = 1.0 / std::sqrt(4.0 * pi * I * a);
  return prefactor * std::polar(1.0, tau_prime * tau_prime / (4.0 * a)) * f(tau_prime / (2.0 * a));
}

namespace {

double envelope_scale(const SpdcSource& source, const FiberChannel& fiber) {
  const double a = fiber.gvd_product();
  if (a == 0.0) throw DomainError("spread correlation: k''z = 0");
  return std::abs(2.0 * a / source.tau0());
}

}  // namespace

bool far_field_valid(const SpdcSource& source, const FiberChannel& fiber, const DelayState& delay) {
  return envelope_scale(source, fiber) >= 10.0 * std::abs(delay.tau0_eff);
}

double g2_spread(const SpdcSource& source, const FiberChannel& fiber, const DelayState& delay,
                 const AnalyzerSettings& settings, double v, double tau_prime) {
  const double tau_f = envelope_scale(source, fiber);
  const bool unpolarized = settings.mode() == AnalyzerMode::none;
  const double c1 = std::cos(settings.theta1()), s1 = std::sin(settings.theta1());
  const double c2 = std::cos(settings.theta2()), s2 = std::sin(settings.theta2());
  // Weights of the F(tau - tau0_eff) and F(tau + tau0_eff) terms.
  const double w_minus = unpolarized ? 1.0 : c2 * s1;
  const double w_plus = unpolarized ? 1.0 : c1 * s2;
  // Orthogonally polarized orderings never interfere without polarizers. The drift
  // factor describes the fibre between crystal and analyzers, absent for a prism before it.
  const double cross = unpolarized ? 0.0
                       : settings.mode() == AnalyzerMode::single_polarizer ? 1.0
                                                                          : v;

  if (tau_f >= 10.0 * std::abs(delay.tau0_eff)) {
    const double x = tau_prime / tau_f;
    const double env = sinc(x) * sinc(x);
    return env * (w_minus * w_minus + w_plus * w_plus +
                  2.0 * cross * w_minus * w_plus * std::cos(2.0 * delay.kappa * x));
  }

  const double a = fiber.gvd_product();
  auto amplitude = [&](double u) { return std::polar(sinc(u / tau_f), u * u / (4.0 * a)); };
  const std::complex<double> am = w_minus * amplitude(tau_prime - delay.tau0_eff);
  const std::complex<double> ap = w_plus * amplitude(tau_prime + delay.tau0_eff);
  return std::norm(am) + std::norm(ap) + 2.0 * cross * std::real(am * std::conj(ap));
}

double g2_pm_analytic(const SpdcSource& source, const FiberChannel& fiber, Sign sign,
                      double drift_visibility, double tau_prime) {
  const auto settings = sign == Sign::plus ? AnalyzerSettings::plus() : AnalyzerSettings::minus();
  return g2_spread(source, fiber, delay_for_kappa(source, 1.0), settings, drift_visibility, tau_prime);
}

double g2_plate_analytic(const SpdcSource& source, const FiberChannel& fiber, const DelayState& delay,
                         Sign sign, double drift_visibility, double tau_prime) {
  const auto settings = sign == Sign::plus ? AnalyzerSettings::plus() : AnalyzerSettings::minus();
  return g2_spread(source, fiber, delay, settings, drift_visibility, tau_prime);
}

double g2_unpolarized(const SpdcSource& source, const FiberChannel& fiber, double tau_prime) {
  const double x = tau_prime / envelope_scale(source, fiber);
  return sinc(x) * sinc(x);
}

}  // namespace biphoton

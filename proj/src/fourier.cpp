#include "biphoton/fourier.hpp"

#include "biphoton/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <vector>

namespace biphoton {

bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

bool UniformAxis::is_centered(double rel_tol) const {
  const double expected = -static_cast<double>(size / 2) * step;
  return std::abs(start - expected) <= rel_tol * std::abs(step) * static_cast<double>(size);
}

FrequencyGrid::FrequencyGrid(Eigen::Index n_samples, double omega_max)
    : n_(n_samples), omega_max_(omega_max) {
  if (n_samples < 2 || !is_power_of_two(n_samples))
    throw ContractViolation("frequency grid: n_samples must be a power of two >= 2");
  if (!(omega_max > 0.0) || !std::isfinite(omega_max))
    throw ContractViolation("frequency grid: omega_max must be positive");
}

double FrequencyGrid::time_step() const { return std::numbers::pi / omega_max_; }
double FrequencyGrid::time_span() const { return 2.0 * std::numbers::pi / spacing(); }

double SampledAmplitude::norm2() const {
  const double sum = values.abs2().sum();
  return domain == Domain::spectral ? sum * axis.step / (2.0 * std::numbers::pi)
                                    : sum * axis.step;
}

namespace {

void require_fourier_layout(const SampledAmplitude& a, Domain expected, const char* op) {
  if (a.domain != expected)
    throw ContractViolation(std::string(op) + ": wrong domain tag");
  if (a.values.size() != a.axis.size)
    throw ContractViolation(std::string(op) + ": values do not match axis length");
  if (!is_power_of_two(a.axis.size) || a.axis.size < 2)
    throw ContractViolation(std::string(op) + ": length must be a power of two");
  if (!a.axis.is_centered())
    throw ContractViolation(std::string(op) + ": axis must be centred on zero");
}

// (-1)^k; with the origin at N/2 the centred DFT kernel factors into
// (-1)^{N/2} (-1)^j (-1)^k exp(+-2 pi i j k / N).
Eigen::ArrayXd alternating(Eigen::Index n) {
  Eigen::ArrayXd s(n);
  for (Eigen::Index k = 0; k < n; ++k) s[k] = (k % 2 == 0) ? 1.0 : -1.0;
  return s;
}

}  // namespace

SampledAmplitude sample_spectral(const SpectralFunction& f, const FrequencyGrid& grid,
                                 Normalization norm) {
  SampledAmplitude a{Domain::spectral, grid.frequency_axis(), {}};
  a.values.resize(a.axis.size);
  for (Eigen::Index k = 0; k < a.axis.size; ++k) a.values[k] = f(a.axis[k]);
  return norm == Normalization::unit_norm ? normalized(std::move(a)) : a;
}

SampledAmplitude to_time_domain(const SampledAmplitude& a) {
  require_fourier_layout(a, Domain::spectral, "to_time_domain");
  const Eigen::Index n = a.axis.size;
  const Eigen::ArrayXd sign = alternating(n);
  const double global = ((n / 2) % 2 == 0) ? 1.0 : -1.0;

  std::vector<std::complex<double>> in(n), out;
  for (Eigen::Index k = 0; k < n; ++k) in[k] = a.values[k] * sign[k];
  Eigen::FFT<double> fft;
  fft.inv(out, in);  // scaled by 1/N

  const double dtau = 2.0 * std::numbers::pi / (static_cast<double>(n) * a.axis.step);
  const double scale = global * a.axis.step * static_cast<double>(n) / (2.0 * std::numbers::pi);
  SampledAmplitude t{Domain::temporal, UniformAxis::centered(n, dtau), {}};
  t.values.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) t.values[j] = out[j] * (scale * sign[j]);
  return t;
}

SampledAmplitude to_frequency_domain(const SampledAmplitude& a) {
  require_fourier_layout(a, Domain::temporal, "to_frequency_domain");
  const Eigen::Index n = a.axis.size;
  const Eigen::ArrayXd sign = alternating(n);
  const double global = ((n / 2) % 2 == 0) ? 1.0 : -1.0;

  std::vector<std::complex<double>> in(n), out;
  for (Eigen::Index j = 0; j < n; ++j) in[j] = a.values[j] * sign[j];
  Eigen::FFT<double> fft;
  fft.fwd(out, in);

  const double domega = 2.0 * std::numbers::pi / (static_cast<double>(n) * a.axis.step);
  const double scale = global * a.axis.step;
  SampledAmplitude f{Domain::spectral, UniformAxis::centered(n, domega), {}};
  f.values.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) f.values[k] = out[k] * (scale * sign[k]);
  return f;
}

SampledAmplitude normalized(SampledAmplitude a) {
  const double n2 = a.norm2();
  if (!(n2 > 0.0) || !std::isfinite(n2))
    throw ContractViolation("normalized: amplitude has zero or non-finite norm");
  a.values /= std::sqrt(n2);
  return a;
}

}  // namespace biphoton

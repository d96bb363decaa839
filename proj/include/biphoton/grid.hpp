#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>

namespace biphoton {

/// Uniformly spaced sample positions: x_i = start + i * step, i in [0, size).
struct UniformAxis {
  double start = 0.0;
  double step = 1.0;
  Eigen::Index size = 0;

  double operator[](Eigen::Index i) const { return start + static_cast<double>(i) * step; }
  double back() const { return (*this)[size - 1]; }

  /// Axis with the origin at index size/2, the layout used by every Fourier pair.
  static UniformAxis centered(Eigen::Index size, double step) {
    return {-static_cast<double>(size / 2) * step, step, size};
  }
  bool is_centered(double rel_tol = 1e-12) const;

  bool operator==(const UniformAxis&) const = default;
};

/// Frequency-offset grid centred on Omega = 0.
class FrequencyGrid {
 public:
  /// Throws ContractViolation unless n_samples is a power of two >= 2 and omega_max > 0.
  FrequencyGrid(Eigen::Index n_samples, double omega_max);

  Eigen::Index n_samples() const { return n_; }
  double omega_max() const { return omega_max_; }
  double spacing() const { return 2.0 * omega_max_ / static_cast<double>(n_); }
  /// Conjugate time step pi / omega_max.
  double time_step() const;
  /// Conjugate time span 2 pi / dOmega.
  double time_span() const;

  UniformAxis frequency_axis() const { return UniformAxis::centered(n_, spacing()); }
  UniformAxis time_axis() const { return UniformAxis::centered(n_, time_step()); }

  bool operator==(const FrequencyGrid&) const = default;

 private:
  Eigen::Index n_;
  double omega_max_;
};

enum class Domain { spectral, temporal };

/// Complex amplitude on a uniform frequency or time axis.
struct SampledAmplitude {
  Domain domain = Domain::spectral;
  UniformAxis axis;
  Eigen::ArrayXcd values;

  /// Energy: sum |v|^2 dOmega / (2 pi) in the spectral domain, sum |v|^2 dtau in time.
  /// The 1/(2 pi) makes Parseval exact for F(tau) = (1/2pi) Int F(Omega) e^{i Omega tau} dOmega.
  double norm2() const;
};

/// Real function sampled on a uniform axis (correlation profiles, expected counts, ...).
template <typename Scalar>
struct Sampled {
  UniformAxis axis;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> values;
};

using Profile = Sampled<double>;

bool is_power_of_two(std::int64_t n);

}  // namespace biphoton

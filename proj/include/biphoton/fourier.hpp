#pragma once

#include "biphoton/grid.hpp"

#include <complex>
#include <functional>

namespace biphoton {

enum class Normalization { raw, unit_norm };

using SpectralFunction = std::function<std::complex<double>(double)>;

/// Samples f(Omega) on the grid. With unit_norm the result is rescaled to norm2() == 1.
SampledAmplitude sample_spectral(const SpectralFunction& f, const FrequencyGrid& grid,
                                 Normalization norm = Normalization::unit_norm);

/// F(tau_j) = (1/2pi) sum_k F(Omega_k) exp(i Omega_k tau_j) dOmega on the conjugate centred grid.
/// Throws ContractViolation unless `a` is spectral on a centred power-of-two axis.
SampledAmplitude to_time_domain(const SampledAmplitude& a);

/// Inverse of to_time_domain: F(Omega_k) = sum_j F(tau_j) exp(-i Omega_k tau_j) dtau.
SampledAmplitude to_frequency_domain(const SampledAmplitude& a);

/// Rescales to unit norm2(); throws ContractViolation for a zero amplitude.
SampledAmplitude normalized(SampledAmplitude a);

}  // namespace biphoton

#include "oracles.hpp"

#include <biphoton/errors.hpp>
#include <biphoton/fourier.hpp>
#include <biphoton/rng.hpp>
#include <biphoton/source.hpp>

#include <doctest.h>

using namespace biphoton;

namespace {

SampledAmplitude random_spectrum(Eigen::Index n, double omega_max, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const FrequencyGrid grid(n, omega_max);
  return sample_spectral([&](double) { return std::complex<double>(rng.uniform() - 0.5, rng.uniform() - 0.5); },
                         grid, Normalization::raw);
}

}  // namespace

TEST_SUITE("fourier") {
  TEST_CASE("time transform agrees with a direct O(N^2) sum") {
    const double omega_max = 3.0e14;
    const auto a = random_spectrum(64, omega_max, 11);
    const auto t = to_time_domain(a);
    const auto ref = oracle::naive_time_transform({a.values.data(), a.values.data() + a.values.size()}, omega_max);
    double worst = 0.0, scale = 0.0;
    for (Eigen::Index j = 0; j < t.values.size(); ++j) {
      worst = std::max(worst, std::abs(t.values[j] - ref[static_cast<std::size_t>(j)]));
      scale = std::max(scale, std::abs(ref[static_cast<std::size_t>(j)]));
    }
    CHECK(worst < 1e-12 * scale);
    CHECK(t.domain == Domain::temporal);
    CHECK(t.axis == FrequencyGrid(64, omega_max).time_axis());
  }

  TEST_CASE("round trip and Parseval hold on the default grid") {
    const SpdcSource src = default_source();
    const FrequencyGrid grid = default_grid(src);
    const auto a = random_spectrum(grid.n_samples(), grid.omega_max(), 5);
    const auto t = to_time_domain(a);
    const auto back = to_frequency_domain(t);
    CHECK((back.values - a.values).abs().maxCoeff() < 1e-9 * a.values.abs().maxCoeff());
    CHECK(t.norm2() == doctest::Approx(a.norm2()).epsilon(1e-9));

    const auto s = sample_spectral([&](double w) { return sinc_spectral_amplitude(src, w); }, grid);
    CHECK(s.norm2() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(to_time_domain(s).norm2() == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("constant spectrum maps to a single central sample") {
    const FrequencyGrid grid(256, 1e14);
    const auto t = to_time_domain(sample_spectral([](double) { return 1.0; }, grid, Normalization::raw));
    const Eigen::Index c = t.values.size() / 2;
    const double total = t.values.abs2().sum();
    CHECK((std::norm(t.values[c - 1]) + std::norm(t.values[c]) + std::norm(t.values[c + 1])) / total ==
          doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("Gaussian spectrum maps to a Gaussian of width 1/sigma") {
    const double sigma = 2.0e12;
    const FrequencyGrid grid(1024, 20.0 * sigma);
    const auto t = to_time_domain(sample_spectral(
        [&](double w) { return std::exp(-w * w / (2.0 * sigma * sigma)); }, grid, Normalization::raw));
    // |F(tau)| = sigma / sqrt(2 pi) exp(-tau^2 sigma^2 / 2)
    double worst = 0.0;
    for (Eigen::Index j = 0; j < t.values.size(); ++j) {
      const double tau = t.axis[j];
      const double ref = sigma / std::sqrt(2.0 * oracle::pi) * std::exp(-0.5 * tau * tau * sigma * sigma);
      worst = std::max(worst, std::abs(t.values[j] - ref));
    }
    CHECK(worst < 1e-10 * sigma);
  }

  TEST_CASE("layout preconditions are enforced") {
    const FrequencyGrid grid(64, 1e14);
    auto a = sample_spectral([](double) { return 1.0; }, grid, Normalization::raw);
    CHECK_THROWS_AS(to_frequency_domain(a), ContractViolation);
    auto shifted = a;
    shifted.axis.start += shifted.axis.step;
    CHECK_THROWS_AS(to_time_domain(shifted), ContractViolation);
    SampledAmplitude odd{Domain::spectral, UniformAxis::centered(48, 1.0), Eigen::ArrayXcd::Ones(48)};
    CHECK_THROWS_AS(to_time_domain(odd), ContractViolation);
    CHECK_THROWS_AS(FrequencyGrid(100, 1.0), ContractViolation);
    CHECK_THROWS_AS(FrequencyGrid(64, 0.0), ContractViolation);
    CHECK_THROWS_AS(normalized(SampledAmplitude{Domain::spectral, grid.frequency_axis(), Eigen::ArrayXcd::Zero(64)}),
                    ContractViolation);
  }

  TEST_CASE("conjugate grids satisfy dOmega * dtau * N = 2 pi") {
    const FrequencyGrid grid(4096, 7.0e13);
    CHECK(grid.spacing() * grid.time_step() * 4096 == doctest::Approx(2.0 * oracle::pi).epsilon(1e-14));
    CHECK(grid.time_span() == doctest::Approx(4096 * grid.time_step()).epsilon(1e-14));
    CHECK(grid.frequency_axis().is_centered());
  }
}

#include "oracles.hpp"

#include <biphoton/errors.hpp>
#include <biphoton/fourier.hpp>
#include <biphoton/source.hpp>
#include <biphoton/units.hpp>

#include <doctest.h>

using namespace biphoton;
using namespace biphoton::units;

TEST_SUITE("source") {
  TEST_CASE("reference crystal has tau0 = 40 fs") {
    const SpdcSource s = default_source();
    CHECK(s.tau0() == doctest::Approx(40 * fs).epsilon(1e-12));
    CHECK(s.degenerate_angular_frequency() ==
          doctest::Approx(oracle::pi * speed_of_light / (351 * nm)).epsilon(1e-12));
    CHECK_THROWS_AS(SpdcSource(0.0, 1e-10, 1e15), ContractViolation);
    CHECK_THROWS_AS(SpdcSource(1e-3, 0.0, 1e15), ContractViolation);
  }

  TEST_CASE("sinc spectral amplitude values") {
    const SpdcSource s = default_source();
    const double dl = 0.16 * ps / mm * 0.5 * mm;
    CHECK(std::abs(sinc_spectral_amplitude(s, 0.0) - 1.0) < 1e-15);
    CHECK(std::abs(sinc_spectral_amplitude(s, 2.0 * oracle::pi / dl)) < 1e-15);
    // DL Omega / 2 = 3 pi / 2
    CHECK(sinc_spectral_amplitude(s, 3.0 * oracle::pi / dl).real() == doctest::Approx(-2.0 / (3.0 * oracle::pi)).epsilon(1e-13));
    for (double x : {1e-9, 1e-6, 9.9e-5, 1.01e-4, 0.3})
      CHECK(sinc(x) == doctest::Approx(std::sin(x) / x).epsilon(1e-15));
  }

  TEST_CASE("analytic rectangle and triangle") {
    const SpdcSource s = default_source();
    CHECK(temporal_amplitude_analytic(s, 0.0).real() == doctest::Approx(1.0 / (80 * fs)));
    CHECK(std::abs(temporal_amplitude_analytic(s, 100 * fs)) == 0.0);
    CHECK(g1(s, 0.0) == 1.0);
    CHECK(g1(s, 80 * fs) == doctest::Approx(0.0));
    CHECK(g1(s, 40 * fs) == doctest::Approx(0.5));
  }

  TEST_CASE("transformed sinc is a rectangle of width 2 tau0") {
    const SpdcSource s = default_source();
    const FrequencyGrid grid = default_grid(s);
    const auto t = to_time_domain(
        sample_spectral([&](double w) { return sinc_spectral_amplitude(s, w); }, grid, Normalization::raw));
    const Eigen::ArrayXd mag = t.values.real();
    const double plateau = mag[mag.size() / 2];
    CHECK(plateau == doctest::Approx(1.0 / (80 * fs)).epsilon(0.02));
    // Half-of-plateau crossings, linearly interpolated.
    Eigen::Index i = mag.size() / 2;
    while (mag[i] > plateau / 2) ++i;
    const double right = t.axis[i - 1] + (mag[i - 1] - plateau / 2) / (mag[i - 1] - mag[i]) * t.axis.step;
    Eigen::Index j = mag.size() / 2;
    while (mag[j] > plateau / 2) --j;
    const double left = t.axis[j] + (plateau / 2 - mag[j]) / (mag[j + 1] - mag[j]) * t.axis.step;
    CHECK(std::abs((right - left) - 80 * fs) <= t.axis.step);
  }

  // The transform of a sinc truncated at |Omega| <= 40 pi/(DL) rings at the rectangle's
  // edges; the relative L2 deviation only falls like one over the square root of the
  // number of retained lobes, so a 1e-3 bound needs a far wider band than this grid.
  TEST_CASE("transformed sinc within 1e-3 relative L2 of the rectangle" * doctest::should_fail()) {
    const SpdcSource s = default_source();
    const FrequencyGrid grid = default_grid(s);
    const auto t = to_time_domain(
        sample_spectral([&](double w) { return sinc_spectral_amplitude(s, w); }, grid, Normalization::raw));
    double num = 0.0, den = 0.0;
    for (Eigen::Index j = 0; j < t.values.size(); ++j) {
      const auto ref = temporal_amplitude_analytic(s, t.axis[j]);
      num += std::norm(t.values[j] - ref);
      den += std::norm(ref);
    }
    CHECK(std::sqrt(num / den) < 1e-3);
  }

  TEST_CASE("sampled g1 follows the triangle") {
    const SpdcSource s = default_source();
    const auto spectral = sample_spectral([&](double w) { return sinc_spectral_amplitude(s, w); }, default_grid(s));
    const Profile g = g1_sampled(spectral);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < g.values.size(); ++j) worst = std::max(worst, std::abs(g.values[j] - g1(s, g.axis[j])));
    // Truncating sinc^2 at |Omega tau0| = X drops a fraction ~1/(pi X) of the power; the
    // pointwise error of the normalised correlation is bounded by twice that.
    const double x = default_grid(s).omega_max() * s.tau0();
    CHECK(worst < 2.0 / (oracle::pi * x));
    CHECK(g.values[g.values.size() / 2] == doctest::Approx(1.0));
  }
}

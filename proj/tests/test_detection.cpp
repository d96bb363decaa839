#include "oracles.hpp"

#include <biphoton/analysis.hpp>
#include <biphoton/detection.hpp>
#include <biphoton/errors.hpp>
#include <biphoton/units.hpp>

#include <doctest.h>

#include <sstream>

using namespace biphoton;
using namespace biphoton::units;

namespace {

Profile gaussian_profile(double fwhm, double dt, Eigen::Index n) {
  const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  Profile p{UniformAxis::centered(n, dt), Eigen::ArrayXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) p.values[i] = std::exp(-0.5 * std::pow(p.axis[i] / sigma, 2));
  return p;
}

CoincidenceModel sinc2_model(double tf) {
  return [tf](double t) { return std::pow(oracle::sinc(t / tf), 2); };
}

}  // namespace

TEST_SUITE("detection") {
  TEST_CASE("MCA geometry: a 0.43 ns window holds exactly seven channels") {
    DetectionChain c;
    const UniformAxis ax = c.channel_axis();
    CHECK(ax[c.n_channels / 2] == 0.0);
    CHECK(ax.step == 61.4 * ps);
    CHECK(c.span_end() - c.span_begin() == doctest::Approx(512 * 61.4 * ps));
    CoincidenceHistogram h{ax, Eigen::Array<std::int64_t, Eigen::Dynamic, 1>::Ones(ax.size), {}};
    CHECK(window_counts(h, 0.0, 0.43 * ns) == 7);
    CHECK(window_counts(h, 0.5 * (c.span_begin() + c.span_end()), c.span_end() - c.span_begin()) == 512);
    CHECK_THROWS_AS(window_counts(h, 0.0, 40 * ns), RangeError);
    h.channel_counts.setZero();
    CHECK(window_counts(h, 0.0, 0.43 * ns) == 0);
    c.mca_channel_width = 0.0;
    CHECK_THROWS_AS(c.validate(), ContractViolation);
  }

  TEST_CASE("piecewise-linear integration") {
    Profile p{UniformAxis{0.0, 0.5, 21}, Eigen::ArrayXd(21)};
    for (Eigen::Index i = 0; i < 21; ++i) p.values[i] = 3.0 * p.axis[i] + 1.0;
    CHECK(integrate(p, 0.3, 7.1) == doctest::Approx(1.5 * (7.1 * 7.1 - 0.09) + 6.8).epsilon(1e-13));
    CHECK(integrate(p, 2.2, 2.2) == doctest::Approx(7.6));
    CHECK(integrate(p, 7.1, 0.3) == doctest::Approx(-integrate(p, 0.3, 7.1)));
    CHECK(integrate(p, 0.1, 0.2) == doctest::Approx(0.145).epsilon(1e-13));
  }

  TEST_CASE("jitter convolution") {
    const Profile narrow = gaussian_profile(10 * ps, 1 * ps, 4096);
    CHECK((jitter_convolve(narrow, 0.0).values == narrow.values).all());
    const Profile wide = jitter_convolve(narrow, 750 * ps);
    CHECK(fwhm(wide) == doctest::Approx(std::hypot(750.0, 10.0) * ps).epsilon(1e-3));
    CHECK(wide.values.sum() == doctest::Approx(narrow.values.sum()).epsilon(1e-6));

    // Against direct quadrature of the smeared spread peak.
    const double tf = 1.6 * ns;
    const UniformAxis ax = UniformAxis::centered(8192, 10 * ps);
    const Profile conv = jitter_convolve(sample_profile(sinc2_model(tf), ax), 750 * ps);
    for (double t : {0.0, 0.4 * ns, 2.1 * ns, -5.3 * ns}) {
      const auto i = static_cast<Eigen::Index>(std::llround((t - ax.start) / ax.step));
      CHECK(conv.values[i] ==
            doctest::Approx(oracle::gaussian_smear(sinc2_model(tf), 750 * ps, ax[i])).epsilon(2e-4));
    }
  }

  TEST_CASE("smeared G- keeps a floor at the centre") {
    const SpdcSource s = default_source();
    const FiberChannel f = reference_fiber(1000);
    const double tf = 1.6 * ns;
    const auto gp = [&](double t) { return oracle::g_plus(t / tf); };
    const auto gm = [&](double t) { return oracle::g_minus(t / tf); };
    const double ratio_ref = oracle::gaussian_smear(gp, 750 * ps, 0.0) / oracle::gaussian_smear(gm, 750 * ps, 0.0);
    const UniformAxis ax = UniformAxis::centered(8192, 5 * ps);
    const Profile p = jitter_convolve(
        sample_profile([&](double t) { return g2_pm_analytic(s, f, Sign::plus, 1.0, t); }, ax), 750 * ps);
    const Profile m = jitter_convolve(
        sample_profile([&](double t) { return g2_pm_analytic(s, f, Sign::minus, 1.0, t); }, ax), 750 * ps);
    const Eigen::Index c = ax.size / 2;
    CHECK(m.values[c] > 0.01);
    CHECK(p.values[c] / m.values[c] == doctest::Approx(ratio_ref).epsilon(1e-4));
    CHECK(ratio_ref == doctest::Approx(25.8).epsilon(0.02));
  }

  TEST_CASE("Monte Carlo is reproducible and independent of thread count") {
    DetectionChain c;
    c.acquisition_pairs = 50'000;
    c.accidental_rate = 2.0;
    const auto model = sinc2_model(0.384 * ns);
    const auto a = simulate_histogram(model, c, 42, 1);
    const auto b = simulate_histogram(model, c, 42, 7);
    const auto d = simulate_histogram(model, c, 43, 3);
    CHECK(a == b);
    CHECK_FALSE(a == d);
  }

  TEST_CASE("Monte Carlo bookkeeping") {
    DetectionChain c;
    c.acquisition_pairs = 0;
    const auto model = sinc2_model(1.6 * ns);
    CHECK(simulate_histogram(model, c, 1).total() == 0);
    CHECK_THROWS_AS(simulate_histogram([](double) { return 0.0; }, DetectionChain{}, 1), EmptyModelError);

    // Fraction of the model mass inside the span, from quadrature of the smeared peak.
    c.acquisition_pairs = 200'000;
    c.accidental_rate = 3.0;
    const double tf = 1.6 * ns;
    const double lo = c.span_begin(), hi = c.span_end(), sigma = c.jitter_sigma();
    // Events are drawn from the model restricted to the simulation grid.
    const UniformAxis g = model_axis(c);
    const double a = g.start - g.step / 2, b = g.back() + g.step / 2;
    const double grid_mass = oracle::simpson(sinc2_model(tf), a, b, 200000);
    const double inside = oracle::simpson(
        [&](double t) {
          return std::pow(oracle::sinc(t / tf), 2) * 0.5 *
                 (std::erf((hi - t) / (sigma * std::sqrt(2.0))) - std::erf((lo - t) / (sigma * std::sqrt(2.0))));
        },
        a, b, 200000);
    const double frac = inside / grid_mass;
    CHECK(frac < 1.0);
    const double expected = c.acquisition_pairs * frac + c.accidental_rate * c.n_channels;
    const auto h = simulate_histogram(model, c, 9);
    CHECK(std::abs(static_cast<double>(h.total()) - expected) < 5.0 * std::sqrt(expected));
    const Profile e = expected_channel_counts(model, c);
    CHECK(e.values.sum() == doctest::Approx(expected).epsilon(2e-3));
  }

  TEST_CASE("accidentals are Poisson per channel") {
    DetectionChain c;
    c.acquisition_pairs = 0;
    c.accidental_rate = 5.0;
    const auto h = simulate_histogram(sinc2_model(1e-9), c, 77);
    const double mean = static_cast<double>(h.total()) / c.n_channels;
    const Eigen::ArrayXd x = h.channel_counts.cast<double>();
    const double var = (x - mean).square().sum() / (c.n_channels - 1);
    CHECK(std::abs(mean - 5.0) < 5.0 * std::sqrt(5.0 / c.n_channels));
    CHECK(var == doctest::Approx(5.0).epsilon(0.25));
  }

  TEST_CASE("histogram CSV round trip and rejection of bad input") {
    DetectionChain c;
    c.acquisition_pairs = 10'000;
    c.window_center = 3.3 * ns;
    auto h = simulate_histogram(sinc2_model(0.384 * ns), c, 5);
    h.metadata.emplace_back("config.fiber.length", "240 m");
    std::stringstream ss;
    write_histogram_csv(ss, h);
    const auto back = read_histogram_csv(ss);
    CHECK(back == h);

    std::stringstream bad1("# a=1\nchannel,time_ns,counts\n0,0.0,5\n1,0.5,x\n");
    CHECK_THROWS_AS(read_histogram_csv(bad1), FormatError);
    std::stringstream bad2("channel,time_ns,counts\n0,0.0,5\n1,0.5,3\n2,1.7,3\n");
    CHECK_THROWS_AS(read_histogram_csv(bad2), FormatError);
    std::stringstream bad3("nonsense\n");
    CHECK_THROWS_AS(read_histogram_csv(bad3), FormatError);
    std::stringstream ok("channel,time_ns,counts\n0,-1.0,5\n1,-0.5,3\n2,0.0,3\n");
    const auto plain = read_histogram_csv(ok);
    CHECK(plain.time_axis.step == doctest::Approx(0.5 * ns));
    CHECK(plain.total() == 11);
  }
}

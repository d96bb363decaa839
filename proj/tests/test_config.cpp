#include <biphoton/config.hpp>
#include <biphoton/units.hpp>

#include <doctest.h>

using namespace biphoton;
using namespace biphoton::units;

TEST_SUITE("config") {
  TEST_CASE("empty text gives the 240 m defaults") {
    const ExperimentConfig c = parse_config("");
    CHECK(c == ExperimentConfig{});
    CHECK(c.fiber_length == 240.0);
    CHECK(c.analyzer_mode == AnalyzerMode::none);
    CHECK(c.drift_visibility == 1.0);
    CHECK(parse_config("# only a comment\n\n") == ExperimentConfig{});
  }

  TEST_CASE("1 km file with sections, dotted keys and composed units") {
    const ExperimentConfig c = parse_config(R"(seed = 9
[fiber]
length = 1 km
k_double_prime = 3.2e-28 s^2/cm
[source]
inverse_gv_difference = 0.16 ps/mm
crystal_length = 500 um
chain.jitter_fwhm = 750 ps
analyzer.theta1 = -45deg
analyzer.theta2 = 45 deg
analyzer.mode = two-polarizers
)");
    CHECK(c.seed == 9);
    CHECK(c.fiber_length == 1000.0);
    CHECK(c.chain.jitter_fwhm == doctest::Approx(750e-12));
    CHECK(c.theta1 == doctest::Approx(-45 * deg));
    CHECK(spread_scale(c.source(), c.fiber(), c.delay()).tau_f == doctest::Approx(1.6 * ns).epsilon(1e-12));
  }

  TEST_CASE("every problem is reported with its line") {
    try {
      parse_config("fiber.length = 1 km\nfiber.colour = red\nchain.jitter_fwhm = 750 m\nfiber.length = 2 km\n"
                   "drift_visibility = 1.5\nnot a pair\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const auto& p = e.problems();
      REQUIRE(p.size() == 4);
      CHECK(p[0].rfind("line 2: unknown key", 0) == 0);
      CHECK(p[1].rfind("line 3: chain.jitter_fwhm", 0) == 0);
      CHECK(p[2].rfind("line 4: duplicate key", 0) == 0);
      CHECK(p[3].rfind("line 6:", 0) == 0);
    }
    CHECK_THROWS_AS(parse_config("drift_visibility = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("fiber.length = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("grid.n_samples = 1000\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("analyzer.mode = single-polarizer\nanalyzer.theta1 = 10 deg\n"), ConfigError);
  }

  TEST_CASE("kappa and an explicit plate list conflict") {
    CHECK_THROWS_AS(parse_config("[plates]\nkappa = 0.5\ndelays = 31.7 fs\n"), ConfigError);
    CHECK(parse_config("[plates]\nkappa = 0.5\n").delay().kappa == doctest::Approx(0.5));
    CHECK(parse_config("[plates]\ndelays = -20 fs\n").delay().kappa == doctest::Approx(0.5));
    CHECK(parse_config("[plates]\ndelays = 31.7 fs, 31.7 fs\n").delay().kappa == doctest::Approx(2.585));
  }

  TEST_CASE("format and parse round-trip exactly") {
    for (const auto& p : presets()) {
      CHECK(parse_config(format_config(p.config)) == p.config);
      CHECK(config_from_metadata(config_metadata(p.config)) == p.config);
    }
    ExperimentConfig odd;
    odd.kappa = 1.0 / 3.0;
    odd.grid_omega_max = 1.234567890123e15;
    odd.theta1 = 0.1;
    odd.theta2 = 0.1;
    odd.analyzer_mode = AnalyzerMode::single_polarizer;
    odd.chain.accidental_rate = 0.7;
    CHECK(parse_config(format_config(odd)) == odd);
  }

  TEST_CASE("quantities") {
    CHECK(parse_quantity("0.43ns", "time") == doctest::Approx(0.43e-9));
    CHECK(parse_quantity("30deg", "angle") == doctest::Approx(30 * deg));
    CHECK(parse_quantity("1e-3 rad", "angle") == doctest::Approx(1e-3));
    CHECK(parse_quantity("2 fs^2/mm", "gvd") == doctest::Approx(2e-30 / 1e-3));
    CHECK(parse_quantity("5e14 rad/s", "frequency") == doctest::Approx(5e14));
    CHECK_THROWS_AS(parse_quantity("5", "time"), DomainError);
    CHECK_THROWS_AS(parse_quantity("5 kg", "time"), DomainError);
    CHECK_THROWS_AS(parse_quantity("fast ns", "time"), DomainError);
  }

  TEST_CASE("presets") {
    CHECK(presets().size() == 14);
    CHECK(preset("fig3b").config.fiber_length == 1000.0);
    CHECK(preset("fig7a").config.delay().kappa == doctest::Approx(1 - 31.7 / 40));
    CHECK(preset("fig7c").config.delay().kappa == doctest::Approx(1 + 31.7 / 40));
    CHECK(preset("fig8c").config.delay().kappa == doctest::Approx(1 + 2 * 31.7 / 40));
    CHECK(preset("fig8a").config.analyzer_mode == AnalyzerMode::single_polarizer);
    CHECK(preset("fig4b").config.theta1 == doctest::Approx(-45 * deg));
    CHECK_THROWS_AS(preset("fig9"), ContractViolation);
    for (const auto& p : presets()) CHECK_NOTHROW(p.config.validate());
  }
}

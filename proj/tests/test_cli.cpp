#include <biphoton/analysis.hpp>
#include <biphoton/cli.hpp>
#include <biphoton/config.hpp>
#include <biphoton/units.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace biphoton;
using namespace biphoton::units;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = run_subcommand(args, out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("biphoton_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// Largest departure of the resolved interference structure from the incoherent sum,
// relative to the peak, after jitter.
double structure_visibility(const ExperimentConfig& c) {
  Setup coherent = c.setup();
  Setup incoherent = coherent;
  incoherent.settings = AnalyzerSettings(c.theta1, c.theta2, AnalyzerMode::two_polarizers);
  incoherent.drift_visibility = 0.0;
  const Profile a = convolved_g2(coherent, c.chain), b = convolved_g2(incoherent, c.chain);
  return (a.values - b.values).abs().maxCoeff() / b.values.maxCoeff();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("simulate is byte-identical for a fixed seed and any thread count, and fit reads it back") {
    const fs::path dir = scratch("simulate");
    const auto cfg = dir / "km.cfg";
    write(cfg, "[fiber]\nlength = 1 km\n[chain]\npairs = 200000\n");
    const auto a = dir / "a.csv", b = dir / "b.csv", c = dir / "c.csv";
    REQUIRE(run({"simulate", "--config", cfg.string(), "--out", a.string(), "--seed", "5", "--threads", "1"}).status == 0);
    REQUIRE(run({"simulate", "--config", cfg.string(), "--out", b.string(), "--seed", "5", "--threads", "4"}).status == 0);
    REQUIRE(run({"simulate", "--config", cfg.string(), "--out", c.string(), "--seed", "6"}).status == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) != slurp(c));

    const auto report = dir / "fit.txt";
    const Run r = run({"fit", "--in", a.string(), "--model", "plain", "--out", report.string()});
    CHECK(r.status == 0);
    const std::string text = slurp(report);
    CHECK(text.find("model=plain") != std::string::npos);
    CHECK(text.find("converged=true") != std::string::npos);
    const std::string residuals = slurp(dir / "fit.txt.residuals.csv");
    CHECK(residuals.rfind("channel,data,model,residual\n", 0) == 0);
    CHECK(std::count(residuals.begin(), residuals.end(), '\n') == 513);
  }

  TEST_CASE("scan and bell write their reports") {
    const fs::path dir = scratch("scan");
    const auto cfg = dir / "km.cfg";
    write(cfg, "fiber.length = 1000 m\nanalyzer.theta1 = 45 deg\nanalyzer.theta2 = 45 deg\n"
               "analyzer.mode = two-polarizers\ndrift_visibility = 0.85\n");
    const auto scan = dir / "scan.csv";
    const Run s = run({"scan", "--config", cfg.string(), "--theta2", "45deg", "--window", "0.43ns", "--out", scan.string()});
    CHECK(s.status == 0);
    const std::string csv = slurp(scan);
    CHECK(csv.find("theta1_deg,expected,sampled\n") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 37);

    const auto bell = dir / "bell.txt";
    const Run b = run({"bell", "--config", cfg.string(), "--theta", "30deg", "--out", bell.string()});
    CHECK(b.status == 0);
    CHECK(slurp(bell).find("R=") != std::string::npos);
    CHECK(slurp(bell).find("sigma_R=") != std::string::npos);
  }

  TEST_CASE("figures write paired data and model files") {
    const fs::path dir = scratch("figures");
    REQUIRE(run({"figures", "fig5a", "--outdir", dir.string()}).status == 0);
    REQUIRE(run({"figures", "fig5b", "--outdir", dir.string()}).status == 0);
    for (const char* f : {"fig5a_data.csv", "fig5a_model.csv", "fig5b_data.csv", "fig5b_model.csv"})
      CHECK(fs::exists(dir / f));
    std::istringstream data(slurp(dir / "fig5b_data.csv"));
    const auto hist = read_histogram_csv(data);
    CHECK(config_from_metadata(hist.metadata) == preset("fig5b").config);

    const Run r = run({"figures", "fig7", "--outdir", dir.string()});
    CHECK(r.status == 0);
    for (const char* f : {"fig7a", "fig7b", "fig7c", "fig7d"}) CHECK(fs::exists(dir / (std::string(f) + "_model.csv")));
    CHECK(run({"figures", "fig6", "--outdir", dir.string()}).status == 0);
    CHECK(fs::exists(dir / "fig6_scan.csv"));
  }

  TEST_CASE("plate presets: kappa ranges and visibility of the structure") {
    const double k7 = preset("fig7a").config.delay().kappa;
    CHECK(k7 > 0.0);
    CHECK(k7 < 1.0);
    CHECK(preset("fig8c").config.delay().kappa > 1.0);
    // Modulation period pi tau_f / kappa: longer with the parallel plate, shorter with two orthogonal ones.
    CHECK(1.0 / k7 > 1.0 / preset("fig5a").config.delay().kappa);
    CHECK(structure_visibility(preset("fig8c").config) < structure_visibility(preset("fig8a").config));
  }

  TEST_CASE("failures produce one machine-readable error line") {
    const Run missing = run({"simulate", "--config", "/nonexistent/x.cfg", "--out", "/tmp/x.csv"});
    CHECK(missing.status != 0);
    CHECK(missing.err.rfind("error: kind=io message=\"", 0) == 0);

    const fs::path dir = scratch("errors");
    write(dir / "bad.cfg", "fiber.length = 1 kg\n");
    const Run bad = run({"simulate", "--config", (dir / "bad.cfg").string(), "--out", (dir / "o.csv").string()});
    CHECK(bad.status != 0);
    CHECK(bad.err.rfind("error: kind=config", 0) == 0);

    const Run usage = run({"fit", "--in", "x.csv", "--model", "cubic", "--out", "r.txt"});
    CHECK(usage.status != 0);
    CHECK(usage.err.rfind("error: kind=usage", 0) == 0);
    CHECK(run({}).status != 0);
    CHECK(run({"figures", "fig42", "--outdir", dir.string()}).err.rfind("error: kind=contract_violation", 0) == 0);
  }

  TEST_CASE("preset prints a parseable config") {
    const Run r = run({"preset", "fig8b"});
    REQUIRE(r.status == 0);
    CHECK(parse_config(r.out) == preset("fig8b").config);
  }
}

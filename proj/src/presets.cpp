#include "biphoton/config.hpp"

#include "biphoton/units.hpp"

namespace biphoton {

namespace {

using units::deg;
using units::fs;
using units::mm;

// Group delay difference of crystalline quartz near 702 nm.
constexpr double quartz_delay_per_length = 31.7 * fs / mm;
constexpr double quartz_1mm = quartz_delay_per_length * 1.0 * mm;

ExperimentConfig fibre(double length_m) {
  ExperimentConfig c;
  c.fiber_length = length_m;
  return c;
}

ExperimentConfig analysed(ExperimentConfig c, double theta1, double theta2,
                          AnalyzerMode mode = AnalyzerMode::two_polarizers) {
  c.theta1 = theta1;
  c.theta2 = theta2;
  c.analyzer_mode = mode;
  return c;
}

ExperimentConfig with_plates(ExperimentConfig c, std::vector<double> delays) {
  c.plate_delays = std::move(delays);
  return c;
}

std::vector<Preset> build() {
  const ExperimentConfig short_fibre = fibre(240.0);
  const ExperimentConfig long_fibre = fibre(1000.0);
  std::vector<Preset> p;

  // Unpolarized spread peaks; FWHM about 1.2 ns and 4.5 ns after the 0.75 ns jitter.
  p.push_back({"fig3a", "240 m fibre, no polarizers", short_fibre, ModelFamily::plain});
  p.push_back({"fig3b", "1 km fibre, no polarizers", long_fibre, ModelFamily::plain});

  // 240 m: the modulation period is below the jitter, so the centre visibility stays low.
  // The measured 35 % needs drift_visibility of about 0.96 in this model; see README.
  p.push_back({"fig4a", "240 m fibre, theta1 = theta2 = 45 deg",
               analysed(short_fibre, 45 * deg, 45 * deg), ModelFamily::gpm});
  p.push_back({"fig4b", "240 m fibre, theta1 = -45 deg, theta2 = 45 deg",
               analysed(short_fibre, -45 * deg, 45 * deg), ModelFamily::gpm});

  // 1 km: the structure is resolved. A 78 % fringe visibility in the 0.43 ns centre
  // window needs drift_visibility of about 0.85.
  p.push_back({"fig5a", "1 km fibre, theta1 = theta2 = 45 deg",
               analysed(long_fibre, 45 * deg, 45 * deg), ModelFamily::gpm});
  p.push_back({"fig5b", "1 km fibre, theta1 = -45 deg, theta2 = 45 deg",
               analysed(long_fibre, -45 * deg, 45 * deg), ModelFamily::gpm});
  p.push_back({"fig6", "1 km fibre, theta1 scan with theta2 = 45 deg, 0.43 ns centre window",
               analysed(long_fibre, 45 * deg, 45 * deg), std::nullopt});

  // One 1 mm quartz plate: parallel axis shortens the e-o delay (kappa ~ 0.21),
  // orthogonal axis lengthens it (kappa ~ 1.79).
  const auto parallel = with_plates(long_fibre, {-quartz_1mm});
  const auto orthogonal = with_plates(long_fibre, {quartz_1mm});
  p.push_back({"fig7a", "1 km, parallel 1 mm quartz plate, theta1 = theta2 = 45 deg",
               analysed(parallel, 45 * deg, 45 * deg), ModelFamily::plate});
  p.push_back({"fig7b", "1 km, parallel 1 mm quartz plate, theta1 = -45 deg, theta2 = 45 deg",
               analysed(parallel, -45 * deg, 45 * deg), ModelFamily::plate});
  p.push_back({"fig7c", "1 km, orthogonal 1 mm quartz plate, theta1 = theta2 = 45 deg",
               analysed(orthogonal, 45 * deg, 45 * deg), ModelFamily::plate});
  p.push_back({"fig7d", "1 km, orthogonal 1 mm quartz plate, theta1 = -45 deg, theta2 = 45 deg",
               analysed(orthogonal, -45 * deg, 45 * deg), ModelFamily::plate});

  // A single prism before the fibre: no drift after it, so the structure is fully visible
  // up to the jitter. Two orthogonal plates give kappa ~ 2.58, a period near the jitter.
  const auto prism = [](ExperimentConfig c) {
    return analysed(std::move(c), 45 * deg, 45 * deg, AnalyzerMode::single_polarizer);
  };
  p.push_back({"fig8a", "1 km, single prism at 45 deg, no plates", prism(long_fibre), ModelFamily::plate});
  p.push_back({"fig8b", "1 km, single prism at 45 deg, one orthogonal 1 mm plate",
               prism(with_plates(long_fibre, {quartz_1mm})), ModelFamily::plate});
  p.push_back({"fig8c", "1 km, single prism at 45 deg, two orthogonal 1 mm plates",
               prism(with_plates(long_fibre, {quartz_1mm, quartz_1mm})), ModelFamily::plate});
  return p;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build();
  return all;
}

const Preset& preset(const std::string& id) {
  for (const auto& p : presets())
    if (p.id == id) return p;
  std::string known;
  for (const auto& p : presets()) known += (known.empty() ? "" : " ") + p.id;
  throw ContractViolation("unknown preset '" + id + "' (known: " + known + ")");
}

}  // namespace biphoton

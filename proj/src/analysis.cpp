#include "biphoton/analysis.hpp"

#include "biphoton/rng.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>

namespace biphoton {

namespace {

// Analyzer weights of the F(tau - tau0_eff) and F(tau + tau0_eff) terms and the
// coefficient of their cross term, as used by the spread model.
struct Weights {
  double minus = 1.0;
  double plus = 1.0;
  double cross = 0.0;
};

Weights weights(const AnalyzerSettings& s, double v) {
  if (s.mode() == AnalyzerMode::none) return {};
  return {std::cos(s.theta2()) * std::sin(s.theta1()), std::cos(s.theta1()) * std::sin(s.theta2()),
          s.mode() == AnalyzerMode::single_polarizer ? 1.0 : v};
}

}  // namespace

double Setup::g2(double tau_prime, double resolution) const {
  if (fiber.gvd_product() != 0.0)
    return g2_spread(source, fiber, delay, settings, drift_visibility, tau_prime);

  // Unspread: total mass of |F'|^2 relative to the unpolarized pair (= 2), the two
  // rectangles overlapping over a fraction 1 - |kappa| of their width.
  const Weights w = weights(settings, drift_visibility);
  const double overlap = std::max(0.0, 1.0 - std::abs(delay.kappa));
  const double mass = w.minus * w.minus + w.plus * w.plus + 2.0 * w.cross * w.minus * w.plus * overlap;
  if (resolution > 0.0) return std::abs(tau_prime) <= resolution ? mass / (2.0 * resolution) : 0.0;
  const std::complex<double> f = temporal_superposition(source, settings, delay, tau_prime);
  const double tau0 = std::abs(source.tau0());
  return settings.mode() == AnalyzerMode::none
             ? 2.0 * tau0 * (std::norm(temporal_amplitude_analytic(source, tau_prime + delay.tau0_eff)) +
                             std::norm(temporal_amplitude_analytic(source, tau_prime - delay.tau0_eff)))
             : 2.0 * tau0 * std::norm(f);
}

CoincidenceModel Setup::model(double resolution) const {
  return [setup = *this, resolution](double t) { return setup.g2(t, resolution); };
}

Setup Setup::with_settings(const AnalyzerSettings& s) const {
  Setup copy = *this;
  copy.settings = s;
  return copy;
}

Profile convolved_g2(const Setup& setup, const DetectionChain& chain, int oversample) {
  const UniformAxis axis = model_axis(chain, oversample);
  return jitter_convolve(sample_profile(setup.model(axis.step), axis), chain.jitter_fwhm);
}

double visibility(double counts_max, double counts_min) {
  if (!(counts_min >= 0.0) || !(counts_max >= counts_min))
    throw ContractViolation("visibility: need max >= min >= 0");
  if (counts_max == 0.0) throw UndefinedVisibility("visibility: both counts are zero");
  return (counts_max - counts_min) / (counts_max + counts_min);
}

CenterRatio center_ratio(const Profile& g2_plus, const Profile& g2_minus, const Window& window) {
  if (!(g2_plus.axis == g2_minus.axis)) throw ContractViolation("center_ratio: profiles on different grids");
  if (!(window.width >= 0.0)) throw ContractViolation("center_ratio: negative window width");
  const double lo = window.center - window.width / 2.0;
  const double hi = window.center + window.width / 2.0;
  const double num = integrate(g2_plus, lo, hi);
  const double den = integrate(g2_minus, lo, hi);
  if (num <= 0.0 && den <= 0.0) throw DomainError("center_ratio: both profiles vanish in the window");
  if (den <= 1e-15 * std::abs(num)) return {std::numeric_limits<double>::infinity(), true};
  return {num / den, false};
}

namespace {

double window_integral(const Profile& p, const Window& w) {
  return integrate(p, w.center - w.width / 2.0, w.center + w.width / 2.0);
}

}  // namespace

std::vector<FringePoint> fringe_scan(const Setup& setup, const DetectionChain& chain,
                                     const std::vector<double>& theta1_values, double theta2,
                                     const Window& window, double counts_per_setting, std::uint64_t seed) {
  if (!(window.width >= 0.0)) throw ContractViolation("fringe_scan: negative window width");
  if (!(counts_per_setting >= 0.0)) throw ContractViolation("fringe_scan: negative counts");
  const Profile open = convolved_g2(setup.with_settings(AnalyzerSettings::unpolarized()), chain);
  const double reference = window_integral(open, window);
  if (!(reference > 0.0)) throw EmptyModelError("fringe_scan: no coincidences in the window");

  std::vector<FringePoint> out;
  out.reserve(theta1_values.size());
  for (std::size_t i = 0; i < theta1_values.size(); ++i) {
    const AnalyzerSettings s(theta1_values[i], theta2, AnalyzerMode::two_polarizers);
    const double expected =
        counts_per_setting * window_integral(convolved_g2(setup.with_settings(s), chain), window) / reference;
    SplitMix64 rng = stream_for(seed, StreamDomain::settings, i);
    std::poisson_distribution<std::int64_t> poisson(std::max(expected, 0.0));
    out.push_back({theta1_values[i], expected, expected > 0.0 ? poisson(rng) : 0});
  }
  return out;
}

double scan_visibility(const std::vector<FringePoint>& scan, bool sampled) {
  if (scan.empty()) throw ContractViolation("scan_visibility: empty scan");
  double hi = -1.0, lo = std::numeric_limits<double>::infinity();
  for (const auto& p : scan) {
    const double v = sampled ? static_cast<double>(p.sampled) : p.expected;
    hi = std::max(hi, v);
    lo = std::min(lo, v);
  }
  return visibility(hi, lo);
}

BellResult bell_R(double n_theta, double n_3theta, double n_inf, double theta,
                  const std::optional<AccidentalEstimates>& accidentals) {
  if (!(n_theta >= 0.0) || !(n_3theta >= 0.0)) throw ContractViolation("bell_R: negative counts");
  if (!(n_inf > 0.0)) throw ContractViolation("bell_R: N(inf) must be positive");
  if (!(theta > 0.0 && theta < std::numbers::pi / 2.0)) throw ContractViolation("bell_R: theta outside (0, pi/2)");

  BellResult r;
  r.theta = theta;
  r.n_theta = n_theta;
  r.n_3theta = n_3theta;
  r.n_inf = n_inf;
  if (accidentals) {
    r.accidentals_subtracted = true;
    auto sub = [&r](double n, double a) {
      const double v = n - a;
      if (v < 0.0) r.clamped = true;
      return std::max(v, 0.0);
    };
    r.n_theta = sub(n_theta, accidentals->n_theta);
    r.n_3theta = sub(n_3theta, accidentals->n_3theta);
    r.n_inf = sub(n_inf, accidentals->n_inf);
    if (r.n_inf == 0.0) throw DomainError("bell_R: N(inf) vanishes after accidental subtraction");
  }
  r.R = (r.n_theta - r.n_3theta) / r.n_inf;
  // The estimates are treated as exact; the Poisson variance belongs to the raw counts.
  const double c2 = r.n_inf * r.n_inf;
  r.sigma_R = std::sqrt((n_theta + n_3theta) / c2 + r.R * r.R * n_inf / c2);
  return r;
}

double bell_theta1(double theta, double theta2) { return std::numbers::pi / 2.0 - theta2 - theta; }

namespace {

struct BellSettings {
  AnalyzerSettings s[3];
};

BellSettings bell_settings(const BellExperiment& e) {
  return {{AnalyzerSettings(bell_theta1(e.theta, e.theta2), e.theta2),
           AnalyzerSettings(bell_theta1(3.0 * e.theta, e.theta2), e.theta2), AnalyzerSettings::unpolarized()}};
}

double channels_in_window(const DetectionChain& chain, const Window& w) {
  const UniformAxis ax = chain.channel_axis();
  const double tol = 1e-9 * ax.step;
  double n = 0.0;
  for (Eigen::Index i = 0; i < ax.size; ++i)
    if (ax[i] >= w.center - w.width / 2.0 - tol && ax[i] <= w.center + w.width / 2.0 + tol) n += 1.0;
  return n;
}

// Fraction of the unanalysed pairs passing each setting, from the unsmeared G2 mass.
std::array<double, 3> transmissions(const Setup& setup, const DetectionChain& chain, const BellSettings& bs) {
  const UniformAxis axis = model_axis(chain);
  std::array<double, 3> mass{};
  for (int k = 0; k < 3; ++k)
    mass[k] = sample_profile(setup.with_settings(bs.s[k]).model(axis.step), axis).values.sum();
  if (!(mass[2] > 0.0)) throw EmptyModelError("bell: unanalysed model has no mass");
  return {mass[0] / mass[2], mass[1] / mass[2], 1.0};
}

}  // namespace

BellResult simulate_bell(const Setup& setup, const DetectionChain& chain, const BellExperiment& experiment,
                         std::uint64_t seed, unsigned threads) {
  chain.validate();
  const BellSettings bs = bell_settings(experiment);
  const auto trans = transmissions(setup, chain, bs);
  const UniformAxis axis = model_axis(chain);
  double n[3];
  for (int k = 0; k < 3; ++k) {
    SplitMix64 rng = stream_for(seed, StreamDomain::settings, static_cast<std::uint64_t>(k));
    std::poisson_distribution<std::int64_t> poisson(static_cast<double>(experiment.pairs_per_setting) * trans[k]);
    DetectionChain c = chain;
    c.acquisition_pairs = trans[k] > 0.0 ? poisson(rng) : 0;
    const auto hist = simulate_histogram(setup.with_settings(bs.s[k]).model(axis.step), c,
                                         mix64(seed ^ static_cast<std::uint64_t>(k + 1)), threads);
    n[k] = static_cast<double>(window_counts(hist, experiment.window.center, experiment.window.width));
  }
  std::optional<AccidentalEstimates> acc;
  if (experiment.subtract_accidentals && chain.accidental_rate > 0.0) {
    const double a = chain.accidental_rate * channels_in_window(chain, experiment.window);
    acc = AccidentalEstimates{a, a, a};
  }
  return bell_R(n[0], n[1], n[2], experiment.theta, acc);
}

BellResult expected_bell(const Setup& setup, const DetectionChain& chain, const BellExperiment& experiment) {
  chain.validate();
  const BellSettings bs = bell_settings(experiment);
  const auto trans = transmissions(setup, chain, bs);
  const UniformAxis axis = model_axis(chain);
  const UniformAxis ch = chain.channel_axis();
  const double tol = 1e-9 * ch.step;
  double n[3];
  for (int k = 0; k < 3; ++k) {
    DetectionChain c = chain;
    c.acquisition_pairs = experiment.pairs_per_setting;
    Profile counts{ch, Eigen::ArrayXd::Constant(ch.size, chain.accidental_rate)};
    if (trans[k] > 0.0) {
      counts = expected_channel_counts(setup.with_settings(bs.s[k]).model(axis.step), c);
      counts.values = chain.accidental_rate + (counts.values - chain.accidental_rate) * trans[k];
    }
    n[k] = 0.0;
    for (Eigen::Index i = 0; i < ch.size; ++i)
      if (ch[i] >= experiment.window.center - experiment.window.width / 2.0 - tol &&
          ch[i] <= experiment.window.center + experiment.window.width / 2.0 + tol)
        n[k] += counts.values[i];
  }
  std::optional<AccidentalEstimates> acc;
  if (experiment.subtract_accidentals && chain.accidental_rate > 0.0) {
    const double a = chain.accidental_rate * channels_in_window(chain, experiment.window);
    acc = AccidentalEstimates{a, a, a};
  }
  return bell_R(n[0], n[1], n[2], experiment.theta, acc);
}

double fwhm(const Profile& profile, double background) {
  const auto& v = profile.values;
  if (v.size() < 3) throw RangeError("fwhm: profile too short");
  Eigen::Index peak = 0;
  const double top = v.maxCoeff(&peak);
  if (!(top > background)) throw RangeError("fwhm: no maximum above background");
  const double half = background + 0.5 * (top - background);
  const auto& ax = profile.axis;

  Eigen::Index j = peak;
  while (j >= 0 && v[j] > half) --j;
  if (j < 0) throw RangeError("fwhm: no half-maximum crossing on the left");
  const double left = ax[j] + (half - v[j]) / (v[j + 1] - v[j]) * ax.step;

  j = peak;
  while (j < v.size() && v[j] > half) ++j;
  if (j >= v.size()) throw RangeError("fwhm: no half-maximum crossing on the right");
  const double right = ax[j - 1] + (v[j - 1] - half) / (v[j - 1] - v[j]) * ax.step;
  return right - left;
}

}  // namespace biphoton

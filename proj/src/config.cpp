#include "biphoton/config.hpp"

#include "biphoton/units.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace biphoton {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::map<std::string, double>& time_units() {
  static const std::map<std::string, double> u{{"s", units::s},   {"ms", units::ms}, {"us", units::us},
                                               {"ns", units::ns}, {"ps", units::ps}, {"fs", units::fs}};
  return u;
}

const std::map<std::string, double>& length_units() {
  static const std::map<std::string, double> u{{"m", units::m},   {"km", units::km}, {"cm", units::cm},
                                               {"mm", units::mm}, {"um", units::um}, {"nm", units::nm}};
  return u;
}

std::optional<double> lookup(const std::map<std::string, double>& table, const std::string& key) {
  const auto it = table.find(key);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

// Scale factor of `unit` for the dimension, or nullopt when it does not match.
std::optional<double> unit_factor(const std::string& unit, const std::string& dimension) {
  if (dimension == "time") return lookup(time_units(), unit);
  if (dimension == "length") return lookup(length_units(), unit);
  if (dimension == "angle") {
    if (unit == "rad") return units::rad;
    if (unit == "deg") return units::deg;
    return std::nullopt;
  }
  const auto slash = unit.find('/');
  if (slash == std::string::npos) return std::nullopt;
  const std::string num = unit.substr(0, slash), den = unit.substr(slash + 1);
  if (dimension == "dispersion") {
    const auto t = lookup(time_units(), num);
    const auto l = lookup(length_units(), den);
    if (t && l) return *t / *l;
  } else if (dimension == "gvd") {
    if (num.size() > 2 && num.substr(num.size() - 2) == "^2") {
      const auto t = lookup(time_units(), num.substr(0, num.size() - 2));
      const auto l = lookup(length_units(), den);
      if (t && l) return *t * *t / *l;
    }
  } else if (dimension == "frequency") {
    const auto t = lookup(time_units(), den);
    if (num == "rad" && t) return 1.0 / *t;
  }
  return std::nullopt;
}

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v))
    throw DomainError("not a finite number: '" + t + "'");
  return v;
}

std::int64_t parse_integer(const std::string& text) {
  const std::string t = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw DomainError("not an integer: '" + t + "'");
  return v;
}

AnalyzerMode parse_mode(const std::string& text) {
  const std::string t = trim(text);
  if (t == "none") return AnalyzerMode::none;
  if (t == "two-polarizers") return AnalyzerMode::two_polarizers;
  if (t == "single-polarizer") return AnalyzerMode::single_polarizer;
  throw DomainError("unknown analyzer mode '" + t + "' (none, two-polarizers, single-polarizer)");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> s{
      {"source.crystal_length", [](auto& c, auto& v) { c.crystal_length = parse_quantity(v, "length"); }},
      {"source.inverse_gv_difference",
       [](auto& c, auto& v) { c.inverse_gv_difference = parse_quantity(v, "dispersion"); }},
      {"source.pump_wavelength", [](auto& c, auto& v) { c.pump_wavelength = parse_quantity(v, "length"); }},
      {"fiber.length", [](auto& c, auto& v) { c.fiber_length = parse_quantity(v, "length"); }},
      {"fiber.k_prime", [](auto& c, auto& v) { c.k_prime = parse_quantity(v, "dispersion"); }},
      {"fiber.k_double_prime", [](auto& c, auto& v) { c.k_double_prime = parse_quantity(v, "gvd"); }},
      {"plates.delays",
       [](auto& c, auto& v) {
         c.plate_delays.clear();
         const std::string t = trim(v);
         if (t.empty() || t == "none") return;
         std::stringstream ss(t);
         std::string item;
         while (std::getline(ss, item, ',')) c.plate_delays.push_back(parse_quantity(item, "time"));
       }},
      {"plates.kappa", [](auto& c, auto& v) { c.kappa = parse_number(v); }},
      {"analyzer.theta1", [](auto& c, auto& v) { c.theta1 = parse_quantity(v, "angle"); }},
      {"analyzer.theta2", [](auto& c, auto& v) { c.theta2 = parse_quantity(v, "angle"); }},
      {"analyzer.mode", [](auto& c, auto& v) { c.analyzer_mode = parse_mode(v); }},
      {"chain.jitter_fwhm", [](auto& c, auto& v) { c.chain.jitter_fwhm = parse_quantity(v, "time"); }},
      {"chain.channel_width", [](auto& c, auto& v) { c.chain.mca_channel_width = parse_quantity(v, "time"); }},
      {"chain.channels", [](auto& c, auto& v) { c.chain.n_channels = parse_integer(v); }},
      {"chain.window_center", [](auto& c, auto& v) { c.chain.window_center = parse_quantity(v, "time"); }},
      {"chain.accidental_rate", [](auto& c, auto& v) { c.chain.accidental_rate = parse_number(v); }},
      {"chain.pairs", [](auto& c, auto& v) { c.chain.acquisition_pairs = parse_integer(v); }},
      {"grid.n_samples", [](auto& c, auto& v) { c.grid_samples = parse_integer(v); }},
      {"grid.omega_max", [](auto& c, auto& v) { c.grid_omega_max = parse_quantity(v, "frequency"); }},
      {"drift_visibility", [](auto& c, auto& v) { c.drift_visibility = parse_number(v); }},
      {"seed",
       [](auto& c, auto& v) {
         const std::int64_t s = parse_integer(v);
         if (s < 0) throw DomainError("seed must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
  };
  return s;
}

std::string join(const std::vector<std::string>& problems) {
  std::string out = "invalid configuration:";
  for (const auto& p : problems) out += "\n  " + p;
  return out;
}

std::vector<std::string> invariant_problems(const ExperimentConfig& c) {
  std::vector<std::string> problems;
  auto check = [&](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      problems.push_back(std::string(what) + ": " + e.what());
    }
  };
  check("source", [&] { (void)c.source(); });
  check("fiber", [&] { (void)c.fiber(); });
  check("plates", [&] {
    if (c.kappa && !c.plate_delays.empty())
      throw ContractViolation("plates.kappa and plates.delays are redundant; give one of them");
    (void)c.delay();
  });
  check("analyzer", [&] { (void)c.settings(); });
  check("chain", [&] { c.chain.validate(); });
  check("grid", [&] { (void)c.grid(); });
  if (!(c.drift_visibility >= 0.0 && c.drift_visibility <= 1.0))
    problems.push_back("drift_visibility: must lie in [0, 1]");
  return problems;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error(join(problems)), problems_(std::move(problems)) {}

double parse_quantity(const std::string& text, const std::string& dimension) {
  const std::string t = trim(text);
  // Split at the first character that cannot continue a number.
  std::size_t i = 0;
  while (i < t.size() && (std::isdigit(static_cast<unsigned char>(t[i])) || t[i] == '.' || t[i] == '-' ||
                          t[i] == '+' ||
                          ((t[i] == 'e' || t[i] == 'E') && i > 0 &&
                           (std::isdigit(static_cast<unsigned char>(t[i - 1])) || t[i - 1] == '.') &&
                           i + 1 < t.size() &&
                           (std::isdigit(static_cast<unsigned char>(t[i + 1])) || t[i + 1] == '-' ||
                            t[i + 1] == '+'))))
    ++i;
  const double value = parse_number(t.substr(0, i));
  const std::string unit = trim(t.substr(i));
  if (unit.empty()) throw DomainError("missing unit in '" + t + "' (expected a " + dimension + ")");
  const auto factor = unit_factor(unit, dimension);
  if (!factor) throw DomainError("unit '" + unit + "' is not a " + dimension + " unit");
  return value * *factor;
}

SpdcSource ExperimentConfig::source() const {
  if (!(pump_wavelength > 0.0) || !std::isfinite(pump_wavelength))
    throw ContractViolation("pump wavelength must be positive");
  return SpdcSource(crystal_length, inverse_gv_difference,
                    2.0 * std::numbers::pi * units::speed_of_light / pump_wavelength * 0.5);
}

FiberChannel ExperimentConfig::fiber() const { return FiberChannel(fiber_length, k_prime, k_double_prime); }

DelayState ExperimentConfig::delay() const {
  if (kappa) return delay_for_kappa(source(), *kappa);
  std::vector<BirefringentPlate> plates;
  for (double d : plate_delays) plates.push_back(BirefringentPlate::from_signed_delay(d));
  return effective_delay(source(), plates);
}

AnalyzerSettings ExperimentConfig::settings() const { return AnalyzerSettings(theta1, theta2, analyzer_mode); }

FrequencyGrid ExperimentConfig::grid() const {
  if (grid_omega_max) return FrequencyGrid(grid_samples, *grid_omega_max);
  return FrequencyGrid(grid_samples, default_grid(source()).omega_max());
}

Setup ExperimentConfig::setup() const {
  Setup s;
  s.source = source();
  s.fiber = fiber();
  s.delay = delay();
  s.settings = settings();
  s.drift_visibility = drift_visibility;
  return s;
}

FitContext ExperimentConfig::fit_context() const {
  FitContext ctx;
  ctx.source = source();
  ctx.fiber_length = fiber_length;
  ctx.jitter_fwhm = chain.jitter_fwhm;
  ctx.settings = analyzer_mode == AnalyzerMode::none ? AnalyzerSettings::plus() : settings();
  return ctx;
}

void ExperimentConfig::validate() const {
  auto problems = invariant_problems(*this);
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::vector<std::string> problems;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw, section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        problems.push_back(where + "malformed section header '" + line + "'");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back(where + "expected 'key = value'");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    const auto it = setters().find(key);
    if (it == setters().end()) {
      problems.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (!seen.insert(key).second) {
      problems.push_back(where + "duplicate key '" + key + "'");
      continue;
    }
    try {
      it->second(config, value);
    } catch (const Error& e) {
      problems.push_back(where + key + ": " + e.what());
    }
  }
  if (seen.count("plates.kappa") && seen.count("plates.delays"))
    problems.push_back("plates.kappa and plates.delays are redundant; give one of them");
  if (problems.empty()) problems = invariant_problems(config);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return config;
}

std::string to_string(AnalyzerMode mode) {
  switch (mode) {
    case AnalyzerMode::none: return "none";
    case AnalyzerMode::two_polarizers: return "two-polarizers";
    case AnalyzerMode::single_polarizer: return "single-polarizer";
  }
  return "?";
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "drift_visibility = " << format17(c.drift_visibility) << '\n';
  out << "seed = " << c.seed << '\n';
  out << "\n[source]\n";
  out << "crystal_length = " << format17(c.crystal_length) << " m\n";
  out << "inverse_gv_difference = " << format17(c.inverse_gv_difference) << " s/m\n";
  out << "pump_wavelength = " << format17(c.pump_wavelength) << " m\n";
  out << "\n[fiber]\n";
  out << "length = " << format17(c.fiber_length) << " m\n";
  out << "k_prime = " << format17(c.k_prime) << " s/m\n";
  out << "k_double_prime = " << format17(c.k_double_prime) << " s^2/m\n";
  out << "\n[plates]\n";
  if (c.kappa) {
    out << "kappa = " << format17(*c.kappa) << '\n';
  } else {
    out << "delays =";
    for (std::size_t i = 0; i < c.plate_delays.size(); ++i)
      out << (i ? ", " : " ") << format17(c.plate_delays[i]) << " s";
    if (c.plate_delays.empty()) out << " none";
    out << '\n';
  }
  out << "\n[analyzer]\n";
  out << "theta1 = " << format17(c.theta1) << " rad\n";
  out << "theta2 = " << format17(c.theta2) << " rad\n";
  out << "mode = " << to_string(c.analyzer_mode) << '\n';
  out << "\n[chain]\n";
  out << "jitter_fwhm = " << format17(c.chain.jitter_fwhm) << " s\n";
  out << "channel_width = " << format17(c.chain.mca_channel_width) << " s\n";
  out << "channels = " << c.chain.n_channels << '\n';
  out << "window_center = " << format17(c.chain.window_center) << " s\n";
  out << "accidental_rate = " << format17(c.chain.accidental_rate) << '\n';
  out << "pairs = " << c.chain.acquisition_pairs << '\n';
  out << "\n[grid]\n";
  out << "n_samples = " << c.grid_samples << '\n';
  if (c.grid_omega_max) out << "omega_max = " << format17(*c.grid_omega_max) << " rad/s\n";
  return out.str();
}

Metadata config_metadata(const ExperimentConfig& config) {
  Metadata meta;
  std::istringstream in(format_config(config));
  std::string line, section;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    const std::string key = trim(line.substr(0, eq));
    meta.emplace_back("config." + (section.empty() ? key : section + "." + key), trim(line.substr(eq + 1)));
  }
  return meta;
}

ExperimentConfig config_from_metadata(const Metadata& metadata) {
  std::string text;
  for (const auto& [k, v] : metadata)
    if (k.rfind("config.", 0) == 0) text += k.substr(7) + " = " + v + "\n";
  if (text.empty()) throw FormatError("histogram carries no config.* metadata");
  return parse_config(text);
}

}  // namespace biphoton

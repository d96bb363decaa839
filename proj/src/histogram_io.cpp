#include "biphoton/detection.hpp"

#include "biphoton/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace biphoton {

namespace {

constexpr const char* key_start = "axis_start_s";
constexpr const char* key_step = "axis_step_s";

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, int line) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
    throw FormatError("histogram csv line " + std::to_string(line) + ": bad number '" + t + "'");
  return v;
}

std::int64_t parse_int(const std::string& s, int line) {
  const std::string t = trim(s);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
    throw FormatError("histogram csv line " + std::to_string(line) + ": bad integer '" + t + "'");
  return v;
}

}  // namespace

void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& hist) {
  out << "# " << key_start << '=' << format17(hist.time_axis.start) << '\n';
  out << "# " << key_step << '=' << format17(hist.time_axis.step) << '\n';
  for (const auto& [k, v] : hist.metadata) {
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos ||
        v.find('\n') != std::string::npos)
      throw FormatError("histogram metadata key/value not representable: " + k);
    out << "# " << k << '=' << v << '\n';
  }
  out << "channel,time_ns,counts\n";
  char buf[64];
  for (Eigen::Index i = 0; i < hist.time_axis.size; ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", hist.time_axis[i] * 1e9);
    out << i << ',' << buf << ',' << hist.channel_counts[i] << '\n';
  }
}

CoincidenceHistogram read_histogram_csv(std::istream& in) {
  CoincidenceHistogram hist;
  std::string line;
  int lineno = 0;
  bool header = false;
  double start = NAN, step = NAN;
  std::vector<double> times;
  std::vector<std::int64_t> counts;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!header && line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos)
        throw FormatError("histogram csv line " + std::to_string(lineno) + ": metadata without '='");
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key == key_start) start = parse_double(value, lineno);
      else if (key == key_step) step = parse_double(value, lineno);
      else hist.metadata.emplace_back(key, value);
      continue;
    }
    if (!header) {
      if (trim(line) != "channel,time_ns,counts")
        throw FormatError("histogram csv line " + std::to_string(lineno) + ": expected header");
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string a, b, c, extra;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') ||
        std::getline(ss, extra, ','))
      throw FormatError("histogram csv line " + std::to_string(lineno) + ": expected 3 fields");
    if (parse_int(a, lineno) != static_cast<std::int64_t>(counts.size()))
      throw FormatError("histogram csv line " + std::to_string(lineno) + ": channels out of order");
    times.push_back(parse_double(b, lineno));
    const std::int64_t n = parse_int(c, lineno);
    if (n < 0) throw FormatError("histogram csv line " + std::to_string(lineno) + ": negative count");
    counts.push_back(n);
  }
  if (!header) throw FormatError("histogram csv: missing header");
  if (counts.empty()) throw FormatError("histogram csv: no channels");

  const auto n = static_cast<Eigen::Index>(counts.size());
  if (std::isnan(start) || std::isnan(step)) {
    start = times.front() * 1e-9;
    step = n > 1 ? (times.back() - times.front()) * 1e-9 / static_cast<double>(n - 1) : 1e-12;
  }
  if (!(step > 0.0)) throw FormatError("histogram csv: axis step must be positive");
  hist.time_axis = {start, step, n};
  for (Eigen::Index i = 0; i < n; ++i) {
    // The written column carries 1e-6 ns resolution.
    if (std::abs(hist.time_axis[i] * 1e9 - times[i]) > 1e-6 + 1e-12 * std::abs(times[i]))
      throw FormatError("histogram csv: time column inconsistent with a uniform axis at channel " +
                        std::to_string(i));
  }
  hist.channel_counts = Eigen::Map<Eigen::Array<std::int64_t, Eigen::Dynamic, 1>>(counts.data(), n);
  return hist;
}

}  // namespace biphoton

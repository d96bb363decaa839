#include "biphoton/cli.hpp"

#include "biphoton/analysis.hpp"
#include "biphoton/config.hpp"
#include "biphoton/units.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace biphoton {

namespace {

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

CoincidenceHistogram simulate(const ExperimentConfig& config, unsigned threads) {
  const Setup setup = config.setup();
  auto hist = simulate_histogram(setup.model(config.chain.mca_channel_width / 15.0), config.chain, config.seed,
                                 threads);
  hist.metadata = config_metadata(config);
  return hist;
}

Profile model_overlay(const ExperimentConfig& config) {
  const Setup setup = config.setup();
  return expected_channel_counts(setup.model(config.chain.mca_channel_width / 15.0), config.chain);
}

void write_model_csv(std::ostream& out, const Profile& model) {
  out << "channel,time_ns,model_counts\n";
  for (Eigen::Index i = 0; i < model.axis.size; ++i)
    out << i << ',' << fmt(model.axis[i] / units::ns, "%.6f") << ',' << fmt(model.values[i]) << '\n';
}

// Coincidences the window would collect with the analyzers removed.
double open_window_counts(const ExperimentConfig& config, const Window& window) {
  Setup setup = config.setup().with_settings(AnalyzerSettings::unpolarized());
  const Profile counts = expected_channel_counts(setup.model(config.chain.mca_channel_width / 15.0), config.chain);
  const double tol = 1e-9 * counts.axis.step;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < counts.axis.size; ++i)
    if (std::abs(counts.axis[i] - window.center) <= window.width / 2.0 + tol)
      sum += counts.values[i] - config.chain.accidental_rate;
  return sum;
}

std::vector<FringePoint> run_scan(const ExperimentConfig& config, double theta2, const Window& window,
                                  double step) {
  if (!(step > 0.0)) throw ContractViolation("scan step must be positive");
  std::vector<double> thetas;
  const auto n = static_cast<int>(std::floor(180.0 * units::deg / step + 1e-9));
  for (int i = 0; i <= n; ++i) thetas.push_back(-90.0 * units::deg + i * step);
  return fringe_scan(config.setup(), config.chain, thetas, theta2, window, open_window_counts(config, window),
                     config.seed);
}

void write_scan_csv(std::ostream& out, const std::vector<FringePoint>& scan) {
  out << "# visibility_expected=" << fmt(scan_visibility(scan)) << '\n';
  out << "theta1_deg,expected,sampled\n";
  for (const auto& p : scan) out << fmt(p.theta1 / units::deg, "%.6f") << ',' << fmt(p.expected) << ',' << p.sampled << '\n';
}

std::string bell_report(const BellResult& r, const BellResult& expected) {
  std::ostringstream out;
  out << "theta_deg=" << fmt(r.theta / units::deg) << '\n';
  out << "n_theta=" << fmt(r.n_theta) << '\n';
  out << "n_3theta=" << fmt(r.n_3theta) << '\n';
  out << "n_inf=" << fmt(r.n_inf) << '\n';
  out << "R=" << fmt(r.R) << '\n';
  out << "sigma_R=" << fmt(r.sigma_R) << '\n';
  out << "accidentals_subtracted=" << (r.accidentals_subtracted ? "true" : "false") << '\n';
  out << "clamped=" << (r.clamped ? "true" : "false") << '\n';
  out << "violates_classical_bound=" << (r.violates_classical_bound() ? "true" : "false") << '\n';
  out << "R_expected=" << fmt(expected.R) << '\n';
  return out.str();
}

void write_residuals(const std::string& path, const CoincidenceHistogram& hist, const FitResult& fit) {
  auto out = open_out(path);
  out << "channel,data,model,residual\n";
  for (Eigen::Index i = 0; i < hist.channel_counts.size(); ++i) {
    const double d = static_cast<double>(hist.channel_counts[i]);
    const double m = fit.model_counts[i];
    out << i << ',' << hist.channel_counts[i] << ',' << fmt(m) << ',' << fmt((d - m) / std::sqrt(std::max(d, 1.0)))
        << '\n';
  }
}

std::vector<const Preset*> select_presets(const std::string& id) {
  std::vector<const Preset*> chosen;
  for (const auto& p : presets())
    if (id == "all" || p.id == id || (p.id.rfind(id, 0) == 0 && p.id.size() == id.size() + 1)) chosen.push_back(&p);
  if (chosen.empty()) (void)preset(id);  // throws with the list of known ids
  return chosen;
}

void run_figure(const Preset& p, const std::filesystem::path& dir, unsigned threads, std::ostream& log) {
  const ExperimentConfig& c = p.config;
  if (p.id == "fig6") {
    const Window window{c.chain.window_center, 0.43 * units::ns};
    const auto scan = run_scan(c, 45.0 * units::deg, window, 5.0 * units::deg);
    auto out = open_out((dir / (p.id + "_scan.csv")).string());
    write_scan_csv(out, scan);
    log << p.id << ": scan visibility " << fmt(scan_visibility(scan), "%.4f") << '\n';
    return;
  }
  const auto hist = simulate(c, threads);
  {
    auto out = open_out((dir / (p.id + "_data.csv")).string());
    write_histogram_csv(out, hist);
  }
  const Profile model = model_overlay(c);
  {
    auto out = open_out((dir / (p.id + "_model.csv")).string());
    out << "# kappa=" << fmt(c.delay().kappa) << '\n';
    write_model_csv(out, model);
  }
  log << p.id << ": " << p.description << ", kappa " << fmt(c.delay().kappa, "%.4f") << ", model centre "
      << fmt(model.values[model.axis.size / 2], "%.2f") << " counts/channel\n";
}

std::string escape(std::string s) {
  std::string out;
  for (char ch : s) {
    if (ch == '\n') out += "; ";
    else if (ch == '"') out += "\\\"";
    else out += ch;
  }
  return out;
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spread biphoton correlation simulator"};
  app.name("biphoton");
  app.require_subcommand(1);

  std::string config_path, out_path, in_path, model_name = "plain", residuals_path, theta2_text = "45deg",
                                                window_text = "0.43ns", step_text = "5deg", theta_text = "30deg",
                                                figure_id, outdir = ".", preset_id;
  std::optional<std::int64_t> seed;
  unsigned threads = 0;
  bool no_subtract = false;

  auto* sim = app.add_subcommand("simulate", "simulate a coincidence histogram");
  sim->add_option("--config", config_path, "experiment config file")->required();
  sim->add_option("--out", out_path, "histogram CSV")->required();
  sim->add_option("--seed", seed, "override the config seed");
  sim->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto* fit = app.add_subcommand("fit", "fit a histogram");
  fit->add_option("--in", in_path, "histogram CSV")->required();
  fit->add_option("--model", model_name, "plain, gpm or plate")->check(CLI::IsMember({"plain", "gpm", "plate"}));
  fit->add_option("--out", out_path, "report file")->required();
  fit->add_option("--residuals", residuals_path, "residual CSV (default <out>.residuals.csv)");

  auto* scan = app.add_subcommand("scan", "polarizer-1 fringe scan in a centre window");
  scan->add_option("--config", config_path)->required();
  scan->add_option("--theta2", theta2_text);
  scan->add_option("--window", window_text);
  scan->add_option("--step", step_text);
  scan->add_option("--out", out_path)->required();

  auto* bell = app.add_subcommand("bell", "Bell statistic R = (N(theta) - N(3 theta)) / N(inf)");
  bell->add_option("--config", config_path)->required();
  bell->add_option("--theta", theta_text);
  bell->add_option("--theta2", theta2_text);
  bell->add_option("--window", window_text);
  bell->add_option("--out", out_path)->required();
  bell->add_option("--threads", threads);
  bell->add_flag("--no-subtract", no_subtract, "keep accidental coincidences");

  auto* figures = app.add_subcommand("figures", "run figure presets and write data/model CSVs");
  figures->add_option("id", figure_id, "preset id, figure prefix (fig7) or all")->required();
  figures->add_option("--outdir", outdir);
  figures->add_option("--threads", threads);

  auto* show = app.add_subcommand("preset", "print a preset as a config file");
  show->add_option("id", preset_id)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: kind=usage message=\"" << escape(e.what()) << "\"\n";
    return 2;
  }

  try {
    if (*sim) {
      ExperimentConfig config = load_config(config_path);
      if (seed) {
        if (*seed < 0) throw ContractViolation("seed must be nonnegative");
        config.seed = static_cast<std::uint64_t>(*seed);
      }
      const auto hist = simulate(config, threads);
      auto f = open_out(out_path);
      write_histogram_csv(f, hist);
      out << "simulated " << hist.total() << " coincidences into " << out_path << '\n';
    } else if (*fit) {
      std::istringstream in(read_file(in_path));
      const auto hist = read_histogram_csv(in);
      const ExperimentConfig config = config_from_metadata(hist.metadata);
      const auto family = parse_model_family(model_name);
      const std::string res_path = residuals_path.empty() ? out_path + ".residuals.csv" : residuals_path;
      try {
        const FitResult r = fit_spread_peak(hist, family, config.fit_context());
        open_out(out_path) << format_fit_report(r);
        write_residuals(res_path, hist, r);
        out << format_fit_report(r);
      } catch (const FitNotConverged& e) {
        open_out(out_path) << format_fit_report(e.best());
        write_residuals(res_path, hist, e.best());
        throw;
      }
    } else if (*scan) {
      const ExperimentConfig config = load_config(config_path);
      const Window window{config.chain.window_center, parse_quantity(window_text, "time")};
      const auto points =
          run_scan(config, parse_quantity(theta2_text, "angle"), window, parse_quantity(step_text, "angle"));
      auto f = open_out(out_path);
      write_scan_csv(f, points);
      out << "scan visibility " << fmt(scan_visibility(points), "%.4f") << '\n';
    } else if (*bell) {
      const ExperimentConfig config = load_config(config_path);
      BellExperiment e;
      e.theta = parse_quantity(theta_text, "angle");
      e.theta2 = parse_quantity(theta2_text, "angle");
      e.window = {config.chain.window_center, parse_quantity(window_text, "time")};
      e.pairs_per_setting = config.chain.acquisition_pairs;
      e.subtract_accidentals = !no_subtract;
      const BellResult r = simulate_bell(config.setup(), config.chain, e, config.seed, threads);
      const std::string report = bell_report(r, expected_bell(config.setup(), config.chain, e));
      open_out(out_path) << report;
      out << report;
    } else if (*figures) {
      std::filesystem::create_directories(outdir);
      for (const Preset* p : select_presets(figure_id)) run_figure(*p, outdir, threads, out);
    } else if (*show) {
      const Preset& p = preset(preset_id);
      out << "# " << p.id << ": " << p.description << '\n' << format_config(p.config);
    }
  } catch (const Error& e) {
    err << "error: kind=" << e.kind() << " message=\"" << escape(e.what()) << "\"\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: kind=internal message=\"" << escape(e.what()) << "\"\n";
    return 1;
  }
  return 0;
}

}  // namespace biphoton

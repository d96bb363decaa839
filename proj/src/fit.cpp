#include "biphoton/analysis.hpp"

#include "biphoton/units.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace biphoton {

ModelFamily parse_model_family(const std::string& name) {
  if (name == "plain") return ModelFamily::plain;
  if (name == "gpm") return ModelFamily::gpm;
  if (name == "plate") return ModelFamily::plate;
  throw ContractViolation("unknown model family '" + name + "' (expected plain, gpm or plate)");
}

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::plain: return "plain";
    case ModelFamily::gpm: return "gpm";
    case ModelFamily::plate: return "plate";
  }
  return "?";
}

double FitResult::sigma(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p.sigma;
  throw ContractViolation("fit has no parameter '" + name + "'");
}

namespace {

enum Index { POS = 0, HEIGHT = 1, GVD = 2, BG = 3 };

// Evaluates the family on the histogram's channels. Parameter layout:
// plain {pos, h, k'', bg}, gpm {.., V}, plate {.., kappa, V}.
class PeakModel {
 public:
  PeakModel(const CoincidenceHistogram& hist, ModelFamily family, const FitContext& ctx, int oversample)
      : family_(family), ctx_(ctx) {
    const auto& ax = hist.time_axis;
    chain_.mca_channel_width = ax.step;
    chain_.n_channels = ax.size;
    chain_.window_center = ax[ax.size / 2];
    chain_.jitter_fwhm = ctx.jitter_fwhm;
    chain_.acquisition_pairs = 0;
    fine_ = model_axis(chain_, oversample);
    oversample_ = oversample;
    if (family != ModelFamily::plain) {
      const auto& s = ctx.settings;
      if (s.mode() == AnalyzerMode::none) throw ContractViolation("fit: polarized family needs analyzer angles");
      w_minus_ = std::cos(s.theta2()) * std::sin(s.theta1());
      w_plus_ = std::cos(s.theta1()) * std::sin(s.theta2());
      incoherent_ = w_minus_ * w_minus_ + w_plus_ * w_plus_;
      if (!(incoherent_ > 0.0)) throw ContractViolation("fit: analyzer angles block every pair");
    }
  }

  int n_params() const { return family_ == ModelFamily::plain ? 4 : family_ == ModelFamily::gpm ? 5 : 6; }
  double kappa(const Eigen::VectorXd& p) const { return family_ == ModelFamily::plate ? p[4] : 1.0; }
  double vis(const Eigen::VectorXd& p) const { return family_ == ModelFamily::plain ? 1.0 : p[n_params() - 1]; }

  double tau_f(double k2) const { return 2.0 * k2 * ctx_.fiber_length / std::abs(ctx_.source.tau0()); }

  /// Jitter-smeared unit-height shape on the fine grid.
  Profile fine_shape(const Eigen::VectorXd& p) const {
    const double tf = tau_f(p[GVD]);
    const double kap = kappa(p), v = vis(p);
    Profile shape{fine_, Eigen::ArrayXd(fine_.size)};
    for (Eigen::Index i = 0; i < fine_.size; ++i) {
      const double x = (fine_[i] - p[POS]) / tf;
      const double env = sinc(x) * sinc(x);
      shape.values[i] = family_ == ModelFamily::plain
                            ? env
                            : env * (incoherent_ + 2.0 * v * w_minus_ * w_plus_ * std::cos(2.0 * kap * x)) /
                                  incoherent_;
    }
    return jitter_convolve(shape, chain_.jitter_fwhm);
  }

  /// Channel-averaged unit-height shape.
  Eigen::ArrayXd channel_shape(const Eigen::VectorXd& p) const {
    return bin_to_channels(fine_shape(p), chain_) / static_cast<double>(oversample_);
  }

  Eigen::ArrayXd counts(const Eigen::VectorXd& p) const { return p[BG] + p[HEIGHT] * channel_shape(p); }

  void clamp(Eigen::VectorXd& p, const Eigen::VectorXd& previous) const {
    p[BG] = std::max(p[BG], 0.0);
    if (!(p[HEIGHT] > 0.0)) p[HEIGHT] = 0.5 * previous[HEIGHT];
    if (!(p[GVD] > 0.0)) p[GVD] = 0.5 * previous[GVD];
    if (family_ == ModelFamily::plate) p[4] = std::max(p[4], 0.0);
    if (family_ != ModelFamily::plain) p[n_params() - 1] = std::clamp(p[n_params() - 1], 0.0, 1.0);
  }

  std::vector<std::string> names() const {
    std::vector<std::string> n{"peak_position", "peak_height", "gvd_k_double_prime", "background"};
    if (family_ == ModelFamily::plate) n.emplace_back("modulation_kappa");
    if (family_ != ModelFamily::plain) n.emplace_back("drift_visibility");
    return n;
  }

  const DetectionChain& chain() const { return chain_; }

 private:
  ModelFamily family_;
  FitContext ctx_;
  DetectionChain chain_;
  UniformAxis fine_;
  int oversample_ = 4;
  double w_minus_ = 0.0, w_plus_ = 0.0, incoherent_ = 1.0;
};

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

double chi2(const Eigen::ArrayXd& data, const Eigen::ArrayXd& weight, const Eigen::ArrayXd& model) {
  return ((data - model).square() * weight).sum();
}

// Height and background minimising chi2 for a fixed shape, kept inside their bounds.
std::pair<double, double> linear_height_background(const Eigen::ArrayXd& data, const Eigen::ArrayXd& weight,
                                                   const Eigen::ArrayXd& shape) {
  const double sw = weight.sum(), ss = (weight * shape).sum(), sss = (weight * shape * shape).sum();
  const double sd = (weight * data).sum(), ssd = (weight * shape * data).sum();
  const double det = sw * sss - ss * ss;
  double h = det != 0.0 ? (sw * ssd - ss * sd) / det : 0.0;
  double bg = det != 0.0 ? (sss * sd - ss * ssd) / det : 0.0;
  if (bg < 0.0) {
    bg = 0.0;
    h = sss > 0.0 ? ssd / sss : 0.0;
  }
  return {std::max(h, 1e-12), bg};
}

struct Start {
  Eigen::VectorXd p;
  double width = 0.0;
};

Start initial_guess(const PeakModel& model, ModelFamily family, const Eigen::ArrayXd& data,
                    const UniformAxis& ax, const FitContext& ctx) {
  const Eigen::Index n = data.size();
  const Eigen::Index edge = std::max<Eigen::Index>(1, n / 20);
  std::vector<double> outer;
  for (Eigen::Index i = 0; i < edge; ++i) {
    outer.push_back(data[i]);
    outer.push_back(data[n - 1 - i]);
  }
  const double bg = median(outer);

  // Five-channel running mean keeps single-channel fluctuations out of the peak search.
  Eigen::ArrayXd smooth(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index a = std::max<Eigen::Index>(0, i - 2), b = std::min<Eigen::Index>(n - 1, i + 2);
    smooth[i] = data.segment(a, b - a + 1).mean();
  }
  Eigen::Index peak = 0;
  const double top = smooth.maxCoeff(&peak);
  const double excess = top - bg;
  if (excess < 5.0 * std::sqrt(std::max(bg, 1.0)))
    throw RankDeficiencyError("fit: histogram has no peak above the background (flat data)");

  // Outermost half-maximum crossings: robust against interference dips inside the peak.
  const double half = bg + 0.5 * excess;
  Eigen::Index lo = 0, hi = n - 1;
  while (lo < n - 1 && smooth[lo] < half) ++lo;
  while (hi > 0 && smooth[hi] < half) --hi;
  const double width = std::max(static_cast<double>(hi - lo + 1), 1.0) * ax.step;

  double position = ax[peak];
  if (family != ModelFamily::plain) {
    double m0 = 0.0, m1 = 0.0;
    for (Eigen::Index i = lo; i <= hi; ++i) {
      const double e = std::max(data[i] - bg, 0.0);
      m0 += e;
      m1 += e * ax[i];
    }
    if (m0 > 0.0) position = m1 / m0;
  }

  const double jitter = ctx.jitter_fwhm;
  const double intrinsic = std::sqrt(std::max(width * width - jitter * jitter, 0.09 * width * width));
  const double tau_f = intrinsic / 2.78;
  const double k2 = tau_f * std::abs(ctx.source.tau0()) / (2.0 * ctx.fiber_length);

  Eigen::VectorXd p(model.n_params());
  p[POS] = position;
  p[HEIGHT] = excess;
  p[GVD] = k2;
  p[BG] = bg;
  if (family == ModelFamily::plate) p[4] = 1.0;
  if (family != ModelFamily::plain) p[model.n_params() - 1] = 1.0;
  return {p, width};
}

}  // namespace

FitResult fit_spread_peak(const CoincidenceHistogram& hist, ModelFamily family, const FitContext& context,
                          const FitOptions& options) {
  if (!(context.fiber_length > 0.0)) throw ContractViolation("fit: fiber length must be positive");
  const PeakModel model(hist, family, context, options.oversample);
  const int np = model.n_params();
  const Eigen::Index n = hist.channel_counts.size();
  if (n < 5 * np)
    throw ContractViolation("fit: need at least " + std::to_string(5 * np) + " channels for " + std::to_string(np) +
                            " parameters");
  if ((hist.channel_counts == 0).all()) throw ContractViolation("fit: histogram is empty");
  if ((hist.channel_counts < 0).any()) throw ContractViolation("fit: negative counts");

  const Eigen::ArrayXd data = hist.channel_counts.cast<double>();
  const Eigen::ArrayXd weight = 1.0 / data.max(1.0);
  const Eigen::ArrayXd sqrt_weight = weight.sqrt();
  const auto& ax = hist.time_axis;

  // Coarse scan over the nonlinear shape parameters with height and background solved linearly.
  Start start = initial_guess(model, family, data, ax, context);
  Eigen::VectorXd p = start.p;
  {
    const std::vector<double> kappas = family == ModelFamily::plate
                                           ? std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75,
                                                                 2.0, 2.25, 2.5, 2.75, 3.0}
                                           : std::vector<double>{1.0};
    const std::vector<double> visibilities =
        family == ModelFamily::plain ? std::vector<double>{1.0} : std::vector<double>{1.0, 0.7, 0.4};
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd trial = p;
    for (double m = 0.5; m <= 2.0 + 1e-9; m += 0.1) {
      trial[GVD] = start.p[GVD] * m;
      for (double kap : kappas) {
        if (family == ModelFamily::plate) trial[4] = kap;
        for (double v : visibilities) {
          if (family != ModelFamily::plain) trial[np - 1] = v;
          const Eigen::ArrayXd shape = model.channel_shape(trial);
          const auto [h, bg] = linear_height_background(data, weight, shape);
          trial[HEIGHT] = h;
          trial[BG] = bg;
          const double c = chi2(data, weight, bg + h * shape);
          if (c < best) {
            best = c;
            p = trial;
          }
        }
      }
    }
  }

  Eigen::VectorXd scale(np);
  scale[POS] = ax.step;
  scale[HEIGHT] = std::max(std::abs(p[HEIGHT]), 1.0);
  scale[GVD] = std::abs(p[GVD]);
  scale[BG] = 1.0;
  for (int k = 4; k < np; ++k) scale[k] = 0.01;

  auto jacobian = [&](const Eigen::VectorXd& q) {
    Eigen::MatrixXd J(n, np);
    for (int k = 0; k < np; ++k) {
      const double h = 1e-5 * std::max(std::abs(q[k]), scale[k]);
      Eigen::VectorXd a = q, b = q;
      a[k] += h;
      b[k] -= h;
      J.col(k) = ((model.counts(a) - model.counts(b)) / (2.0 * h) * sqrt_weight).matrix();
    }
    return J;
  };

  double current = chi2(data, weight, model.counts(p));
  double lambda = 1e-3;
  int iterations = 0;
  bool converged = false;
  while (iterations < options.max_iterations && !converged) {
    ++iterations;
    const Eigen::MatrixXd J = jacobian(p);
    const Eigen::VectorXd r = ((data - model.counts(p)) * sqrt_weight).matrix();
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = A;
      damped.diagonal() += lambda * A.diagonal().cwiseMax(1e-300);
      Eigen::VectorXd next = p + damped.ldlt().solve(g);
      model.clamp(next, p);
      const double trial = chi2(data, weight, model.counts(next));
      if (std::isfinite(trial) && trial < current) {
        double change = 0.0;
        for (int k = 0; k < np; ++k)
          change = std::max(change, std::abs(next[k] - p[k]) / std::max(std::abs(p[k]), scale[k]));
        const double drop = (current - trial) / std::max(current, 1e-300);
        p = next;
        current = trial;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        converged = change < options.parameter_tolerance && drop < options.chi2_tolerance;
      } else {
        lambda *= 10.0;
        if (lambda > 1e12) {
          // No descent direction left: the current point is a minimum to working precision.
          converged = true;
          break;
        }
      }
    }
  }

  FitResult fit;
  fit.family = family;
  fit.peak_position = p[POS];
  fit.peak_height = p[HEIGHT];
  fit.gvd_k_double_prime = p[GVD];
  fit.background = p[BG];
  if (family == ModelFamily::plate) fit.modulation_kappa = p[4];
  if (family != ModelFamily::plain) fit.drift_visibility = p[np - 1];
  fit.model_counts = model.counts(p);
  fit.residual_chi2_per_dof = current / static_cast<double>(n - np);
  fit.iterations = iterations;
  fit.converged = converged;

  const Eigen::MatrixXd J = jacobian(p);
  const Eigen::MatrixXd A = J.transpose() * J;
  // Invert in correlation form so parameters of very different magnitude stay well conditioned.
  const Eigen::VectorXd d = A.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd C = d.asDiagonal() * A * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < 1e-13 * eig.eigenvalues().maxCoeff())
    throw RankDeficiencyError("fit: normal matrix is singular; parameters not identifiable from these data");
  const Eigen::MatrixXd cov = d.asDiagonal() * C.inverse() * d.asDiagonal();
  const auto names = model.names();
  for (int k = 0; k < np; ++k) fit.parameters.push_back({names[k], p[k], std::sqrt(std::max(cov(k, k), 0.0))});

  Profile smeared = model.fine_shape(p);
  smeared.values *= p[HEIGHT];
  try {
    fit.fitted_fwhm = fwhm(smeared);
  } catch (const RangeError&) {
    fit.fitted_fwhm = std::numeric_limits<double>::quiet_NaN();
  }

  if (!std::isfinite(fit.residual_chi2_per_dof)) throw RankDeficiencyError("fit: chi2 is not finite");
  if (!converged)
    throw FitNotConverged("fit: no convergence after " + std::to_string(iterations) + " iterations", fit);
  return fit;
}

std::string format_fit_report(const FitResult& fit) {
  std::ostringstream out;
  char buf[64];
  auto put = [&](const std::string& key, double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    out << key << '=' << buf << '\n';
  };
  out << "model=" << to_string(fit.family) << '\n';
  for (const auto& p : fit.parameters) {
    const double unit = p.name == "gvd_k_double_prime" ? units::s * units::s / units::cm : 1.0;
    const std::string suffix = p.name == "gvd_k_double_prime" ? "_s2_per_cm"
                               : p.name == "peak_position"    ? "_s"
                                                              : "";
    put(p.name + suffix, p.value / unit);
    put(p.name + suffix + "_sigma", p.sigma / unit);
  }
  put("residual_chi2_per_dof", fit.residual_chi2_per_dof);
  put("fitted_fwhm_s", fit.fitted_fwhm);
  out << "iterations=" << fit.iterations << '\n';
  out << "converged=" << (fit.converged ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace biphoton

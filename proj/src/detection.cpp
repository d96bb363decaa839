#include "biphoton/detection.hpp"

#include "biphoton/errors.hpp"
#include "biphoton/rng.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

namespace biphoton {

namespace {
constexpr double fwhm_per_sigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)
}

void DetectionChain::validate() const {
  if (!(jitter_fwhm >= 0.0) || !std::isfinite(jitter_fwhm))
    throw ContractViolation("detection chain: jitter_fwhm must be >= 0");
  if (!(mca_channel_width > 0.0) || !std::isfinite(mca_channel_width))
    throw ContractViolation("detection chain: channel width must be > 0");
  if (n_channels < 1) throw ContractViolation("detection chain: need at least one channel");
  if (!(accidental_rate >= 0.0) || !std::isfinite(accidental_rate))
    throw ContractViolation("detection chain: accidental rate must be >= 0");
  if (acquisition_pairs < 0) throw ContractViolation("detection chain: acquisition_pairs must be >= 0");
  if (!std::isfinite(window_center)) throw ContractViolation("detection chain: window centre not finite");
}

double DetectionChain::jitter_sigma() const { return jitter_fwhm / fwhm_per_sigma; }

UniformAxis DetectionChain::channel_axis() const {
  return {window_center - static_cast<double>(n_channels / 2) * mca_channel_width, mca_channel_width,
          n_channels};
}

double DetectionChain::span_begin() const { return channel_axis().start - mca_channel_width / 2.0; }
double DetectionChain::span_end() const { return channel_axis().back() + mca_channel_width / 2.0; }

std::string CoincidenceHistogram::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return {};
}

Profile sample_profile(const CoincidenceModel& model, const UniformAxis& axis) {
  Profile p{axis, Eigen::ArrayXd(axis.size)};
  for (Eigen::Index i = 0; i < axis.size; ++i) p.values[i] = model(axis[i]);
  return p;
}

double integrate(const Profile& p, double lo, double hi) {
  const auto& ax = p.axis;
  if (ax.size == 0) return 0.0;
  auto value_at = [&](double t) {
    const double pos = (t - ax.start) / ax.step;
    if (pos <= 0.0) return p.values[0];
    if (pos >= static_cast<double>(ax.size - 1)) return p.values[ax.size - 1];
    const auto i = static_cast<Eigen::Index>(std::floor(pos));
    const double f = pos - static_cast<double>(i);
    return (1.0 - f) * p.values[i] + f * p.values[i + 1];
  };
  if (hi == lo) return value_at(lo);
  const double sign = hi < lo ? -1.0 : 1.0;
  if (hi < lo) std::swap(lo, hi);
  lo = std::max(lo, ax.start);
  hi = std::min(hi, ax.back());
  if (hi <= lo) return 0.0;

  // Whole intervals strictly inside [lo, hi] plus the two partial end pieces.
  const auto first = static_cast<Eigen::Index>(std::ceil((lo - ax.start) / ax.step));
  const auto last = static_cast<Eigen::Index>(std::floor((hi - ax.start) / ax.step));
  if (first > last) return sign * 0.5 * (value_at(lo) + value_at(hi)) * (hi - lo);
  double sum = 0.5 * (value_at(lo) + p.values[first]) * (ax[first] - lo);
  for (Eigen::Index i = first; i < last; ++i) sum += 0.5 * (p.values[i] + p.values[i + 1]) * ax.step;
  sum += 0.5 * (p.values[last] + value_at(hi)) * (hi - ax[last]);
  return sign * sum;
}

Profile jitter_convolve(const Profile& profile, double jitter_fwhm) {
  if (!(jitter_fwhm >= 0.0)) throw ContractViolation("jitter_convolve: FWHM must be >= 0");
  const double sigma = jitter_fwhm / fwhm_per_sigma;
  const double dt = profile.axis.step;
  const auto half = static_cast<Eigen::Index>(std::ceil(8.0 * sigma / dt));
  if (sigma == 0.0 || half == 0) return profile;

  const Eigen::Index n = profile.values.size();
  const Eigen::Index k = 2 * half + 1;
  Eigen::ArrayXd kernel(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double t = static_cast<double>(i - half) * dt;
    kernel[i] = std::exp(-0.5 * t * t / (sigma * sigma));
  }
  kernel /= kernel.sum();

  Eigen::Index m = 1;
  while (m < n + k - 1) m <<= 1;
  std::vector<double> a(m, 0.0), b(m, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) a[i] = profile.values[i];
  for (Eigen::Index i = 0; i < k; ++i) b[i] = kernel[i];
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> fa, fb;
  fft.fwd(fa, a);
  fft.fwd(fb, b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  std::vector<double> full;
  fft.inv(full, fa);

  Profile out{profile.axis, Eigen::ArrayXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) out.values[i] = std::max(0.0, full[i + half]);
  return out;
}

UniformAxis model_axis(const DetectionChain& chain, int oversample) {
  chain.validate();
  if (oversample < 1) throw ContractViolation("model_axis: oversample must be >= 1");
  const double dt = chain.mca_channel_width / oversample;
  const double margin = std::max(6.0 * chain.jitter_sigma(), chain.mca_channel_width);
  const auto pad = static_cast<Eigen::Index>(std::ceil(margin / dt));
  const Eigen::Index n = chain.n_channels * oversample + 2 * pad;
  // Points sit at fine-bin midpoints; bins tile the channels exactly, `oversample` per channel.
  return {chain.span_begin() - static_cast<double>(pad) * dt + dt / 2.0, dt, n};
}

namespace {

struct InverseCdf {
  UniformAxis bins;  // midpoints
  Eigen::ArrayXd density;
  std::vector<double> cumulative;  // inclusive prefix sums of density * dt
  double total = 0.0;

  double draw(double u) const {
    const double target = u * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    auto idx = static_cast<Eigen::Index>(it - cumulative.begin());
    if (idx >= bins.size) idx = bins.size - 1;
    // Skip empty bins that share the prefix value.
    while (density[idx] <= 0.0 && idx + 1 < bins.size) ++idx;
    const double before = idx == 0 ? 0.0 : cumulative[idx - 1];
    const double frac = std::clamp((target - before) / (density[idx] * bins.step), 0.0, 1.0);
    return bins[idx] - bins.step / 2.0 + frac * bins.step;
  }
};

InverseCdf build_cdf(const CoincidenceModel& model, const DetectionChain& chain) {
  InverseCdf cdf;
  cdf.bins = model_axis(chain);
  cdf.density.resize(cdf.bins.size);
  cdf.cumulative.resize(cdf.bins.size);
  double running = 0.0;
  for (Eigen::Index i = 0; i < cdf.bins.size; ++i) {
    const double v = model(cdf.bins[i]);
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ContractViolation("simulate_histogram: model must be finite and nonnegative");
    cdf.density[i] = v;
    running += v * cdf.bins.step;
    cdf.cumulative[i] = running;
  }
  cdf.total = running;
  return cdf;
}

}  // namespace

CoincidenceHistogram simulate_histogram(const CoincidenceModel& model, const DetectionChain& chain,
                                        std::uint64_t seed, unsigned threads) {
  chain.validate();
  const UniformAxis channels = chain.channel_axis();
  CoincidenceHistogram hist{channels, Eigen::Array<std::int64_t, Eigen::Dynamic, 1>::Zero(channels.size),
                            {{"seed", std::to_string(seed)}}};

  const std::int64_t pairs = chain.acquisition_pairs;
  if (pairs > 0) {
    const InverseCdf cdf = build_cdf(model, chain);
    if (!(cdf.total > 0.0)) throw EmptyModelError("simulate_histogram: model integrates to zero");

    const double sigma = chain.jitter_sigma();
    const double begin = chain.span_begin();
    const double width = chain.mca_channel_width;
    auto run = [&](std::int64_t first, std::int64_t last, Eigen::Array<std::int64_t, Eigen::Dynamic, 1>& counts) {
      for (std::int64_t e = first; e < last; ++e) {
        SplitMix64 rng = stream_for(seed, StreamDomain::events, static_cast<std::uint64_t>(e));
        double t = cdf.draw(rng.uniform());
        const double r = std::sqrt(-2.0 * std::log(rng.uniform_nonzero()));
        t += sigma * r * std::cos(2.0 * std::numbers::pi * rng.uniform());
        const double pos = std::floor((t - begin) / width);
        if (pos >= 0.0 && pos < static_cast<double>(counts.size())) ++counts[static_cast<Eigen::Index>(pos)];
      }
    };

    unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    n_threads = static_cast<unsigned>(std::min<std::int64_t>(n_threads, pairs));
    std::vector<Eigen::Array<std::int64_t, Eigen::Dynamic, 1>> partial(
        n_threads, Eigen::Array<std::int64_t, Eigen::Dynamic, 1>::Zero(channels.size));
    if (n_threads == 1) {
      run(0, pairs, partial[0]);
    } else {
      std::vector<std::thread> workers;
      for (unsigned w = 0; w < n_threads; ++w) {
        const std::int64_t first = pairs * w / n_threads;
        const std::int64_t last = pairs * (w + 1) / n_threads;
        workers.emplace_back(run, first, last, std::ref(partial[w]));
      }
      for (auto& t : workers) t.join();
    }
    for (const auto& p : partial) hist.channel_counts += p;
  }

  if (chain.accidental_rate > 0.0) {
    for (Eigen::Index c = 0; c < channels.size; ++c) {
      SplitMix64 rng = stream_for(seed, StreamDomain::accidentals, static_cast<std::uint64_t>(c));
      std::poisson_distribution<std::int64_t> poisson(chain.accidental_rate);
      hist.channel_counts[c] += poisson(rng);
    }
  }
  return hist;
}

Profile expected_channel_counts(const CoincidenceModel& model, const DetectionChain& chain) {
  chain.validate();
  const UniformAxis fine = model_axis(chain);
  Profile density = sample_profile(model, fine);
  const double total = density.values.sum() * fine.step;
  const UniformAxis channels = chain.channel_axis();
  Profile out{channels, Eigen::ArrayXd::Constant(channels.size, chain.accidental_rate)};
  if (chain.acquisition_pairs == 0) return out;
  if (!(total > 0.0)) throw EmptyModelError("expected_channel_counts: model integrates to zero");
  density.values *= static_cast<double>(chain.acquisition_pairs) * fine.step / total;
  out.values += bin_to_channels(jitter_convolve(density, chain.jitter_fwhm), chain);
  return out;
}

Eigen::ArrayXd bin_to_channels(const Profile& fine, const DetectionChain& chain) {
  const double dt = fine.axis.step;
  const auto per = static_cast<Eigen::Index>(std::llround(chain.mca_channel_width / dt));
  const double first = (chain.span_begin() - (fine.axis.start - dt / 2.0)) / dt;
  const auto offset = static_cast<Eigen::Index>(std::llround(first));
  if (per < 1 || std::abs(per * dt - chain.mca_channel_width) > 1e-9 * dt ||
      std::abs(first - static_cast<double>(offset)) > 1e-6 || offset < 0 ||
      offset + per * chain.n_channels > fine.axis.size)
    throw ContractViolation("bin_to_channels: fine grid not aligned with the MCA channels");
  Eigen::ArrayXd out(chain.n_channels);
  for (Eigen::Index c = 0; c < chain.n_channels; ++c) out[c] = fine.values.segment(offset + c * per, per).sum();
  return out;
}

std::int64_t window_counts(const CoincidenceHistogram& hist, double center, double width) {
  const auto& ax = hist.time_axis;
  if (!(width >= 0.0)) throw RangeError("window_counts: negative width");
  const double tol = 1e-9 * ax.step;
  const double lo = center - width / 2.0;
  const double hi = center + width / 2.0;
  if (lo < ax.start - ax.step / 2.0 - tol || hi > ax.back() + ax.step / 2.0 + tol)
    throw RangeError("window_counts: window outside histogram span");
  std::int64_t sum = 0;
  for (Eigen::Index i = 0; i < ax.size; ++i)
    if (ax[i] >= lo - tol && ax[i] <= hi + tol) sum += hist.channel_counts[i];
  return sum;
}

}  // namespace biphoton

#pragma once

#include "biphoton/grid.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace biphoton {

/// Coincidence-rate model as a function of shifted time tau' (arbitrary units, >= 0).
using CoincidenceModel = std::function<double(double)>;

/// TAC/MCA measurement chain. Channel i is centred at
/// window_center + (i - n_channels/2) * mca_channel_width, so channel n/2 sits on the
/// window centre and an odd-width window around it covers whole channels.
struct DetectionChain {
  double jitter_fwhm = 750e-12;         ///< combined two-detector Gaussian response, s
  double mca_channel_width = 61.4e-12;  ///< s
  Eigen::Index n_channels = 512;
  double window_center = 0.0;           ///< s
  double accidental_rate = 0.0;         ///< expected accidental counts per channel
  std::int64_t acquisition_pairs = 1'000'000;

  /// Throws ContractViolation if any invariant fails.
  void validate() const;
  double jitter_sigma() const;
  UniformAxis channel_axis() const;
  double span_begin() const;  ///< lower edge of the first channel
  double span_end() const;    ///< upper edge of the last channel

  bool operator==(const DetectionChain&) const = default;
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

struct CoincidenceHistogram {
  UniformAxis time_axis;  ///< channel centres
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> channel_counts;
  Metadata metadata;

  std::int64_t total() const { return channel_counts.sum(); }
  /// First value stored under `key`, or empty.
  std::string meta(const std::string& key) const;

  bool operator==(const CoincidenceHistogram& o) const {
    return time_axis == o.time_axis && metadata == o.metadata &&
           channel_counts.size() == o.channel_counts.size() &&
           (channel_counts == o.channel_counts).all();
  }
};

/// Evaluates `model` at every point of `axis`.
Profile sample_profile(const CoincidenceModel& model, const UniformAxis& axis);

/// Integral of the piecewise-linear interpolant of `p` over [lo, hi] (clipped to the axis).
/// For hi == lo the interpolated point value is returned.
double integrate(const Profile& p, double lo, double hi);

/// Convolution with a unit-area Gaussian of the given FWHM. Mass carried past the axis
/// ends is dropped; negative round-off is clamped to zero.
Profile jitter_convolve(const Profile& profile, double jitter_fwhm);

/// Fine grid over the MCA span widened by six jitter sigmas (at least one channel),
/// with `oversample` bins per channel aligned to the channel edges. Points are bin
/// midpoints; with an odd `oversample` every channel centre is itself a sample point.
/// Both Monte Carlo and model overlays use it.
UniformAxis model_axis(const DetectionChain& chain, int oversample = 15);

/// Draws chain.acquisition_pairs delays from the model (normalised over model_axis),
/// adds Gaussian jitter per event, bins them and adds Poisson accidentals per channel.
/// Deterministic in (model, chain, seed) for any thread count (0 = hardware concurrency).
/// Throws EmptyModelError when pairs are requested but the model has no mass.
CoincidenceHistogram simulate_histogram(const CoincidenceModel& model, const DetectionChain& chain,
                                        std::uint64_t seed, unsigned threads = 0);

/// Expected counts per channel matching simulate_histogram's normalisation.
Profile expected_channel_counts(const CoincidenceModel& model, const DetectionChain& chain);

/// Sums the fine bins of a model_axis-aligned profile into the chain's channels.
Eigen::ArrayXd bin_to_channels(const Profile& fine, const DetectionChain& chain);

/// Sum over channels whose centres lie in [center - width/2, center + width/2].
/// Throws RangeError if the window leaves the histogram span.
std::int64_t window_counts(const CoincidenceHistogram& hist, double center, double width);

/// CSV: `# key=value` metadata lines, header `channel,time_ns,counts`, one row per channel.
void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& hist);
/// Throws FormatError on malformed input.
CoincidenceHistogram read_histogram_csv(std::istream& in);

}  // namespace biphoton

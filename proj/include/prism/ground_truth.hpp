#pragma once

// Reference heart rate: either a bpm series or a raw contact-PPG channel.
// Raw PPG goes through the same windowed estimator as predictions, so any
// estimator bias cancels in the comparison.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "prism/error.hpp"
#include "prism/fft.hpp"
#include "prism/spectral.hpp"
#include "prism/trace.hpp"

namespace prism {

enum class GroundTruthKind { HrSeries, RawPpg };

inline constexpr double kMinPlausibleBpm = 30.0;
inline constexpr double kMaxPlausibleBpm = 240.0;

class GroundTruth {
 public:
  GroundTruth(GroundTruthKind kind, std::vector<double> times, std::vector<double> values)
      : kind_(kind), times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size()) {
      fail(ErrorKind::Validation, "ground-truth times and values differ in length");
    }
    if (times_.empty()) fail(ErrorKind::Validation, "ground truth is empty");
    for (std::size_t i = 0; i < times_.size(); ++i) {
      if (!std::isfinite(times_[i]) || !std::isfinite(values_[i])) {
        fail(ErrorKind::Validation, "row " + std::to_string(i) + ": non-finite value");
      }
      if (i > 0 && !(times_[i] > times_[i - 1])) {
        fail(ErrorKind::Validation, "row " + std::to_string(i) + ": times must increase");
      }
      if (kind_ == GroundTruthKind::HrSeries &&
          (values_[i] < kMinPlausibleBpm || values_[i] > kMaxPlausibleBpm)) {
        warnings_.push_back("row " + std::to_string(i) + ": " + std::to_string(values_[i]) +
                            " bpm outside [30, 240]");
      }
    }
    if (kind_ == GroundTruthKind::RawPpg) {
      if (times_.size() < 2) fail(ErrorKind::Validation, "raw PPG needs at least two samples");
      std::vector<double> dt(times_.size() - 1);
      for (std::size_t i = 0; i + 1 < times_.size(); ++i) dt[i] = times_[i + 1] - times_[i];
      std::nth_element(dt.begin(), dt.begin() + static_cast<std::ptrdiff_t>(dt.size() / 2),
                       dt.end());
      fps_ = 1.0 / dt[dt.size() / 2];
    }
  }

  GroundTruthKind kind() const noexcept { return kind_; }
  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return times_.size(); }
  /// Sampling rate of a raw PPG channel (from the median time step); 0 otherwise.
  double fps() const noexcept { return fps_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  GroundTruthKind kind_;
  std::vector<double> times_;
  std::vector<double> values_;
  double fps_ = 0.0;
  std::vector<std::string> warnings_;
};

namespace detail {

inline std::size_t nearest_index(std::span<const double> times, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  if (it == times.end()) return times.size() - 1;
  const auto hi = static_cast<std::size_t>(it - times.begin());
  return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
}

}  // namespace detail

/// Window-aligned reference HR. A bpm series is looked up at the sample
/// nearest each window midpoint and must reach within half a hop of every
/// midpoint. Raw PPG must span the whole plan (to within one PPG sample)
/// and is run through estimate_hr_window per window at its own rate.
inline HrSeries gt_to_hr_series(const GroundTruth& gt, const WindowPlan& plan,
                                const FrequencyBand& band,
                                std::size_t n_fft = kDefaultFftBins,
                                Taper taper = Taper::Rectangular) {
  if (plan.empty()) fail(ErrorKind::InvalidArgument, "empty window plan");
  HrSeries out;
  out.band = band;
  out.provenance = "ground_truth";
  const auto times = gt.times();

  if (gt.kind() == GroundTruthKind::HrSeries) {
    const double tol = std::min(plan.hop, plan.window_length) / 2.0;
    for (const auto& w : plan.windows) {
      const std::size_t i = detail::nearest_index(times, w.midpoint_time);
      if (std::abs(times[i] - w.midpoint_time) > tol) {
        fail(ErrorKind::Coverage, "no reference HR near t = " + std::to_string(w.midpoint_time) +
                                      " s (closest sample at " + std::to_string(times[i]) + " s)");
      }
      out.estimates.push_back({w.midpoint_time, gt.values()[i]});
    }
    return out;
  }

  const double dt = 1.0 / gt.fps();
  const double start = plan.start_time();
  const double end = plan.end_time();
  if (times.front() > start + dt || times.back() < end - dt) {
    fail(ErrorKind::Coverage, "reference PPG spans [" + std::to_string(times.front()) + ", " +
                                  std::to_string(times.back()) + "] s but the trace needs [" +
                                  std::to_string(start) + ", " + std::to_string(end) + "] s");
  }
  band.validate(gt.fps());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& w = plan.windows[i];
    const double w0 = plan.t0 + static_cast<double>(w.start) / plan.fps;
    const double w1 = plan.t0 + static_cast<double>(w.end) / plan.fps;
    const auto first = std::lower_bound(times.begin(), times.end(), w0 - 1e-9 * dt);
    const auto last = std::lower_bound(times.begin(), times.end(), w1 - 1e-9 * dt);
    const auto offset = static_cast<std::size_t>(first - times.begin());
    const auto count = static_cast<std::size_t>(last - first);
    const auto segment = gt.values().subspan(offset, count);
    try {
      const auto est = estimate_hr_window(
          segment, gt.fps(), band, std::max(n_fft, next_power_of_two(segment.size())), taper);
      out.estimates.push_back({w.midpoint_time, est.hr});
    } catch (const Error& e) {
      throw Error(e.kind(), "reference window " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace prism

#pragma once

// Streaming variant: estimates start immediately with default parameters,
// and once enough history has accumulated the dual-band search is re-run on
// the trailing buffer at a fixed interval. New parameters apply from the
// next window boundary on.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iostream>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prism/detrend.hpp"
#include "prism/error.hpp"
#include "prism/pipeline.hpp"
#include "prism/projection.hpp"
#include "prism/spectral.hpp"
#include "prism/trace.hpp"

namespace prism {

struct OnlineSettings {
  double init_duration = 60.0;     // s before the first search
  double refresh_interval = 30.0;  // s between searches
  double buffer_cap = 120.0;       // s of history searched
  double default_lambda = 0.1;
  double default_alpha = 0.8;
};

struct OnlineEstimate {
  double time = 0.0;  // window midpoint
  double hr = 0.0;    // bpm
  double lambda = 0.0;
  double alpha = 0.0;
  FrequencyBand band;
  std::shared_ptr<const DualBandResult> selection;  // null until the first successful search
};

struct RefreshRecord {
  double time = 0.0;  // stream time at which the search ran
  double buffer_start = 0.0;
  bool ok = false;
  std::string error;
  std::shared_ptr<const DualBandResult> result;
};

class OnlineEstimator {
 public:
  using Logger = std::function<void(std::string_view)>;

  OnlineEstimator(PipelineSettings settings, OnlineSettings online, double fps, double t0 = 0.0,
                  Logger log = {})
      : s_(std::move(settings)), o_(online), fps_(fps), t0_(t0), log_(std::move(log)) {
    s_.validate();
    if (!(fps_ > 0.0)) fail(ErrorKind::InvalidArgument, "fps must be > 0");
    window_ = detail::floor_samples(s_.window_length, fps_);
    hop_ = detail::floor_samples(s_.hop, fps_);
    if (window_ < kMinWindowSamples) fail(ErrorKind::WindowTooSmall, "window too short");
    if (hop_ == 0) fail(ErrorKind::InvalidArgument, "hop shorter than one frame");
    if (o_.init_duration < 2.0 * s_.window_length) {
      fail(ErrorKind::InvalidArgument, "initialization must span at least two windows");
    }
    if (!(o_.refresh_interval > 0.0) || o_.buffer_cap < 2.0 * s_.window_length) {
      fail(ErrorKind::InvalidArgument, "refresh interval must be > 0 and buffer >= two windows");
    }
    cap_ = detail::floor_samples(o_.buffer_cap, fps_);
    lambda_ = o_.default_lambda;
    alpha_ = o_.default_alpha;
    band_ = s_.bands.high;
    band_.validate(fps_);
    if (!log_) log_ = [](std::string_view msg) { std::clog << "prism online: " << msg << '\n'; };
  }

  /// Feeds one frame; returns the estimate for a window completed by it, if any.
  std::vector<OnlineEstimate> push(const Rgb& sample) {
    buffer_.push_back(sample);
    ++total_;
    std::vector<OnlineEstimate> out;
    while (total_ >= next_start_ + window_) {
      out.push_back(finish_window());
      next_start_ += hop_;
    }
    trim();
    return out;
  }

  std::vector<OnlineEstimate> push(std::span<const Rgb> samples) {
    std::vector<OnlineEstimate> out;
    for (const auto& s : samples) {
      auto e = push(s);
      out.insert(out.end(), e.begin(), e.end());
    }
    return out;
  }

  const std::vector<RefreshRecord>& refreshes() const noexcept { return refreshes_; }
  double lambda() const noexcept { return lambda_; }
  double alpha() const noexcept { return alpha_; }
  const FrequencyBand& band() const noexcept { return band_; }

 private:
  double time_of(std::size_t index) const { return t0_ + static_cast<double>(index) / fps_; }

  // Trailing buffer region [first, last) as a trace; indices are stream positions.
  RgbTrace region(std::size_t first, std::size_t last) const {
    std::vector<Rgb> samples(buffer_.begin() + static_cast<std::ptrdiff_t>(first - buffer_start_),
                             buffer_.begin() + static_cast<std::ptrdiff_t>(last - buffer_start_));
    return RgbTrace::from_samples(samples, fps_, time_of(first));
  }

  OnlineEstimate finish_window() {
    const std::size_t end = next_start_ + window_;
    const std::size_t first = end > cap_ ? std::max(end - cap_, buffer_start_) : buffer_start_;
    const auto trace = region(first, end);
    const auto normalized = normalize_trace(trace, SplineConfig{lambda_, {}});
    const auto signal = prism_project(normalized, alpha_);
    const auto est = estimate_hr_window(
        std::span<const double>(signal.samples).subspan(next_start_ - first, window_), fps_,
        band_, s_.n_fft, s_.taper);
    OnlineEstimate e{time_of(next_start_) + static_cast<double>(window_) / (2.0 * fps_),
                     est.hr, lambda_, alpha_, band_, current_};
    maybe_refresh(end);
    return e;
  }

  void maybe_refresh(std::size_t end) {
    const double elapsed = static_cast<double>(end) / fps_;
    if (elapsed + 1e-9 < o_.init_duration) return;
    if (!refreshes_.empty() && elapsed - last_refresh_ + 1e-9 < o_.refresh_interval) return;
    last_refresh_ = elapsed;
    const std::size_t first = end > cap_ ? std::max(end - cap_, buffer_start_) : buffer_start_;
    RefreshRecord rec;
    rec.time = time_of(end);
    rec.buffer_start = time_of(first);
    try {
      const auto trace = region(first, end);
      auto result = std::make_shared<const DualBandResult>(run_pipeline(trace, s_));
      lambda_ = result->choice.lambda_star;
      alpha_ = result->choice.alpha_star;
      band_ = result->choice.band_used;
      current_ = result;
      rec.ok = true;
      rec.result = std::move(result);
    } catch (const Error& err) {
      rec.error = err.what();
      log_("refresh at t = " + std::to_string(rec.time) + " s failed, keeping parameters: " +
           rec.error);
    }
    refreshes_.push_back(std::move(rec));
  }

  // The next window ending at next_start_ + window_ reaches back at most cap_
  // samples; older frames are dropped in batches.
  void trim() {
    const std::size_t need_end = next_start_ + window_;
    const std::size_t keep_from = need_end > cap_ ? need_end - cap_ : 0;
    if (keep_from > buffer_start_ + cap_) {
      buffer_.erase(buffer_.begin(),
                    buffer_.begin() + static_cast<std::ptrdiff_t>(keep_from - buffer_start_));
      buffer_start_ = keep_from;
    }
  }

  PipelineSettings s_;
  OnlineSettings o_;
  double fps_;
  double t0_;
  Logger log_;
  std::size_t window_ = 0;
  std::size_t hop_ = 0;
  std::size_t cap_ = 0;

  std::vector<Rgb> buffer_;
  std::size_t buffer_start_ = 0;  // stream index of buffer_[0]
  std::size_t total_ = 0;
  std::size_t next_start_ = 0;
  double last_refresh_ = 0.0;

  double lambda_ = 0.1;
  double alpha_ = 0.8;
  FrequencyBand band_;
  std::shared_ptr<const DualBandResult> current_;
  std::vector<RefreshRecord> refreshes_;
};

/// Replays a recorded trace through the streaming estimator.
inline std::vector<OnlineEstimate> run_online(const RgbTrace& trace,
                                              const PipelineSettings& settings,
                                              const OnlineSettings& online,
                                              std::vector<RefreshRecord>* refreshes = nullptr) {
  OnlineEstimator est(settings, online, trace.fps(), trace.t0());
  std::vector<OnlineEstimate> out;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    auto e = est.push(trace[k]);
    out.insert(out.end(), e.begin(), e.end());
  }
  if (refreshes != nullptr) *refreshes = est.refreshes();
  return out;
}

}  // namespace prism

#pragma once

// RGB trace and windowing geometry shared by the whole pipeline.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prism/error.hpp"

namespace prism {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

/// Uniformly sampled facial-ROI colour means. Immutable once built; the
/// constructor rejects non-finite and non-positive samples because
/// normalization divides by the channel baseline.
class RgbTrace {
 public:
  RgbTrace(std::vector<double> r, std::vector<double> g, std::vector<double> b, double fps,
           double t0 = 0.0)
      : r_(std::move(r)), g_(std::move(g)), b_(std::move(b)), fps_(fps), t0_(t0) {
    if (!(std::isfinite(fps_) && fps_ > 0.0)) {
      fail(ErrorKind::Validation, "fps must be finite and > 0");
    }
    if (!std::isfinite(t0_)) fail(ErrorKind::Validation, "t0 must be finite");
    if (r_.size() != g_.size() || r_.size() != b_.size()) {
      fail(ErrorKind::Validation, "channel lengths differ");
    }
    for (std::size_t k = 0; k < r_.size(); ++k) {
      for (double v : {r_[k], g_[k], b_[k]}) {
        if (!std::isfinite(v) || v <= 0.0) {
          fail(ErrorKind::Validation,
               "row " + std::to_string(k) + ": channel values must be finite and > 0");
        }
      }
    }
  }

  static RgbTrace from_samples(std::span<const Rgb> samples, double fps, double t0 = 0.0) {
    std::vector<double> r, g, b;
    r.reserve(samples.size());
    g.reserve(samples.size());
    b.reserve(samples.size());
    for (const auto& s : samples) {
      r.push_back(s.r);
      g.push_back(s.g);
      b.push_back(s.b);
    }
    return RgbTrace(std::move(r), std::move(g), std::move(b), fps, t0);
  }

  std::size_t size() const noexcept { return r_.size(); }
  double fps() const noexcept { return fps_; }
  double t0() const noexcept { return t0_; }
  double duration() const noexcept { return static_cast<double>(size()) / fps_; }
  double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) / fps_; }

  std::span<const double> r() const noexcept { return r_; }
  std::span<const double> g() const noexcept { return g_; }
  std::span<const double> b() const noexcept { return b_; }

  Rgb operator[](std::size_t k) const noexcept { return {r_[k], g_[k], b_[k]}; }

  std::vector<double> times() const {
    std::vector<double> t(size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = time(k);
    return t;
  }

  /// Samples [first, last) as a new trace with the matching start time.
  RgbTrace slice(std::size_t first, std::size_t last) const {
    if (first > last || last > size()) fail(ErrorKind::InvalidArgument, "slice out of range");
    auto cut = [&](const std::vector<double>& v) {
      return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(first),
                                 v.begin() + static_cast<std::ptrdiff_t>(last));
    };
    return RgbTrace(cut(r_), cut(g_), cut(b_), fps_, time(first));
  }

 private:
  std::vector<double> r_, g_, b_;
  double fps_;
  double t0_;
};

namespace detail {
// Guards floor() against products like 10 * 29.97 landing a hair below an integer.
inline std::size_t floor_samples(double seconds, double fps) {
  return static_cast<std::size_t>(std::floor(seconds * fps + 1e-9));
}
}  // namespace detail

struct WindowRange {
  std::size_t start = 0;  // inclusive sample index
  std::size_t end = 0;    // exclusive sample index
  double midpoint_time = 0.0;
};

struct WindowPlan {
  double window_length = 10.0;  // seconds
  double hop = 10.0;            // seconds
  double fps = 0.0;
  double t0 = 0.0;
  std::size_t samples_per_window = 0;
  std::vector<WindowRange> windows;

  std::size_t size() const noexcept { return windows.size(); }
  bool empty() const noexcept { return windows.empty(); }
  double start_time() const { return t0 + static_cast<double>(windows.front().start) / fps; }
  double end_time() const { return t0 + static_cast<double>(windows.back().end) / fps; }
};

inline constexpr std::size_t kMinWindowSamples = 32;

/// Plans windows over `sample_count` samples. Every window holds exactly
/// floor(window_length * fps) samples; a trailing partial window is dropped.
inline WindowPlan plan_windows(std::size_t sample_count, double fps, double t0,
                               double window_length, double hop) {
  if (!(fps > 0.0) || !(window_length > 0.0) || !(hop > 0.0)) {
    fail(ErrorKind::InvalidArgument, "fps, window length and hop must be > 0");
  }
  WindowPlan plan;
  plan.window_length = window_length;
  plan.hop = hop;
  plan.fps = fps;
  plan.t0 = t0;
  plan.samples_per_window = detail::floor_samples(window_length, fps);
  if (plan.samples_per_window < kMinWindowSamples) {
    fail(ErrorKind::WindowTooSmall, "window holds " + std::to_string(plan.samples_per_window) +
                                        " samples, need at least " +
                                        std::to_string(kMinWindowSamples));
  }
  const std::size_t hop_samples = detail::floor_samples(hop, fps);
  if (hop_samples == 0) fail(ErrorKind::InvalidArgument, "hop is shorter than one frame");
  for (std::size_t start = 0; start + plan.samples_per_window <= sample_count;
       start += hop_samples) {
    const std::size_t end = start + plan.samples_per_window;
    plan.windows.push_back(
        {start, end, t0 + (static_cast<double>(start + end) / 2.0) / fps});
  }
  return plan;
}

inline WindowPlan plan_windows(const RgbTrace& trace, double window_length, double hop) {
  return plan_windows(trace.size(), trace.fps(), trace.t0(), window_length, hop);
}

/// Throws TooShort unless the trace spans at least two analysis windows.
inline void require_two_windows(const RgbTrace& trace, double window_length) {
  const std::size_t needed = 2 * detail::floor_samples(window_length, trace.fps());
  if (trace.size() < needed) {
    fail(ErrorKind::TooShort, "trace has " + std::to_string(trace.size()) +
                                  " samples, need at least " + std::to_string(needed) +
                                  " for two " + std::to_string(window_length) + " s windows");
  }
}

}  // namespace prism

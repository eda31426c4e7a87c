#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "prism/error.hpp"
#include "prism/smoothing_spline.hpp"
#include "prism/trace.hpp"

namespace prism {

/// Channels divided pointwise by their own smoothing-spline baseline.
struct NormalizedTrace {
  std::vector<double> r_hat;
  std::vector<double> g_hat;
  std::vector<double> b_hat;
  double fps = 0.0;
  double t0 = 0.0;

  std::size_t size() const noexcept { return g_hat.size(); }
};

struct ChannelBaselines {
  std::vector<double> r, g, b;
};

inline std::vector<double> spline_baseline(std::span<const double> channel,
                                           std::span<const double> times,
                                           const SplineConfig& cfg) {
  return fit_smoothing_spline(channel, times, cfg).values;
}

inline ChannelBaselines fit_baselines(const RgbTrace& trace, const SplineConfig& cfg) {
  const auto times = trace.times();
  return {spline_baseline(trace.r(), times, cfg), spline_baseline(trace.g(), times, cfg),
          spline_baseline(trace.b(), times, cfg)};
}

namespace detail {
inline std::vector<double> divide_by_baseline(std::span<const double> x,
                                              std::span<const double> baseline, char channel) {
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(baseline[k] > 0.0)) {
      fail(ErrorKind::BaselineNonPositive, std::string("channel ") + channel +
                                               " baseline is not positive at sample " +
                                               std::to_string(k));
    }
    out[k] = x[k] / baseline[k];
  }
  return out;
}
}  // namespace detail

/// X_hat = X / X_tilde for each channel, X_tilde the spline baseline fitted
/// with the time axis in seconds.
inline NormalizedTrace normalize_trace(const RgbTrace& trace, const SplineConfig& cfg) {
  const auto base = fit_baselines(trace, cfg);
  return {detail::divide_by_baseline(trace.r(), base.r, 'r'),
          detail::divide_by_baseline(trace.g(), base.g, 'g'),
          detail::divide_by_baseline(trace.b(), base.b, 'b'), trace.fps(), trace.t0()};
}

}  // namespace prism

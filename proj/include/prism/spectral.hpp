#pragma once

// Windowed periodogram heart-rate estimation and the signal-quality terms
// used to rank candidate pulse signals: spectral concentration C, temporal
// variation TV and the joint objective k * TV - C.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "prism/error.hpp"
#include "prism/fft.hpp"
#include "prism/projection.hpp"
#include "prism/trace.hpp"

namespace prism {

inline constexpr std::size_t kDefaultFftBins = std::size_t{1} << 14;

struct FrequencyBand {
  double f_min = 0.75;  // Hz
  double f_max = 4.0;   // Hz

  void validate(double fps) const {
    if (!(f_min > 0.0 && f_min < f_max && f_max <= fps / 2.0)) {
      fail(ErrorKind::InvalidArgument, "band [" + std::to_string(f_min) + ", " +
                                           std::to_string(f_max) +
                                           "] Hz must satisfy 0 < f_min < f_max <= fps/2");
    }
  }
  bool operator==(const FrequencyBand&) const = default;
};

enum class Taper { Rectangular, Hann };

struct HrEstimate {
  double time = 0.0;  // window midpoint, seconds
  double hr = 0.0;    // bpm
};

struct HrSeries {
  std::vector<HrEstimate> estimates;
  FrequencyBand band;
  std::string provenance;

  std::size_t size() const noexcept { return estimates.size(); }
  double mean_hr() const {
    if (estimates.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& e : estimates) sum += e.hr;
    return sum / static_cast<double>(estimates.size());
  }
};

struct WindowHr {
  double hr = 0.0;
  double peak_power = 0.0;
};

namespace detail {

struct BinRange {
  std::size_t first = 1;
  std::size_t last = 0;  // inclusive; empty when last < first
  bool empty() const noexcept { return last < first; }
};

// Bins m with f_min <= m * fps / n_fft <= f_max, clipped to 0..n_fft/2.
inline BinRange band_bins(const FrequencyBand& band, double fps, std::size_t n_fft) {
  const double per_bin = fps / static_cast<double>(n_fft);
  const double lo = std::max(0.0, std::ceil(band.f_min / per_bin - 1e-9));
  const double hi =
      std::min(static_cast<double>(n_fft / 2), std::floor(band.f_max / per_bin + 1e-9));
  if (hi < lo) return {};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

inline std::vector<double> centered(std::span<const double> x, Taper taper) {
  std::vector<double> out(x.begin(), x.end());
  const double mu = mean_of(x);
  for (double& v : out) v -= mu;
  if (taper == Taper::Hann && out.size() > 1) {
    const double denom = static_cast<double>(out.size() - 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / denom);
    }
  }
  return out;
}

// First bin holding the in-band maximum.
inline std::size_t peak_bin(std::span<const double> power, BinRange bins) {
  std::size_t best = bins.first;
  for (std::size_t m = bins.first + 1; m <= bins.last; ++m) {
    if (power[m] > power[best]) best = m;
  }
  return best;
}

}  // namespace detail

/// Dominant in-band frequency of one window, in bpm. The window is
/// mean-centred and zero-padded to n_fft; ties go to the lower bin. A flat
/// window lands on the lowest in-band bin with ~0 power, so callers that care
/// should gate on peak_power.
inline WindowHr estimate_hr_window(std::span<const double> window, double fps,
                                   const FrequencyBand& band,
                                   std::size_t n_fft = kDefaultFftBins,
                                   Taper taper = Taper::Rectangular) {
  if (window.size() < kMinWindowSamples) {
    fail(ErrorKind::InvalidArgument, "window needs at least 32 samples");
  }
  if (!is_power_of_two(n_fft) || n_fft < window.size()) {
    fail(ErrorKind::InvalidArgument, "n_fft must be a power of two no shorter than the window");
  }
  const auto bins = detail::band_bins(band, fps, n_fft);
  if (bins.empty()) fail(ErrorKind::EmptyBand, "no FFT bin falls inside the band");
  const auto power = power_spectrum(detail::centered(window, taper), n_fft);
  const std::size_t best = detail::peak_bin(power, bins);
  return {60.0 * static_cast<double>(best) * fps / static_cast<double>(n_fft), power[best]};
}

inline HrSeries hr_series(const PulseSignal& signal, const WindowPlan& plan,
                          const FrequencyBand& band, std::size_t n_fft = kDefaultFftBins,
                          Taper taper = Taper::Rectangular) {
  if (std::abs(plan.fps - signal.fps) > 1e-9 * signal.fps) {
    fail(ErrorKind::InvalidArgument, "window plan and signal use different frame rates");
  }
  HrSeries out;
  out.band = band;
  out.provenance = signal.provenance.method;
  out.estimates.reserve(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& w = plan.windows[i];
    if (w.end > signal.size()) {
      fail(ErrorKind::WindowOutOfRange,
           "window " + std::to_string(i) + " ends at sample " + std::to_string(w.end) +
               " but the signal has " + std::to_string(signal.size()));
    }
    try {
      const auto est = estimate_hr_window(
          std::span<const double>(signal.samples).subspan(w.start, w.end - w.start), signal.fps,
          band, n_fft, taper);
      out.estimates.push_back({w.midpoint_time, est.hr});
    } catch (const Error& e) {
      throw Error(e.kind(), "window " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

/// Fraction of the full-trace, mean-centred power that lies in the band.
/// The denominator spans 0 < f <= Nyquist, so the DC bin never counts.
/// The transform length is the next power of two >= max(len, n_fft).
inline double spectral_concentration(const PulseSignal& signal, const FrequencyBand& band,
                                     std::size_t n_fft = kDefaultFftBins) {
  if (signal.samples.empty()) fail(ErrorKind::InvalidArgument, "empty signal");
  const auto x = detail::centered(signal.samples, Taper::Rectangular);
  const double scale = detail::max_abs(signal.samples);
  if (!(detail::max_abs(x) > 1e-12 * scale)) fail(ErrorKind::ZeroPower, "signal has no AC power");
  const std::size_t n = next_power_of_two(std::max(signal.size(), n_fft));
  const auto power = power_spectrum(x, n);
  double total = 0.0;
  for (std::size_t m = 1; m <= n / 2; ++m) total += power[m];
  if (!(total > 0.0)) fail(ErrorKind::ZeroPower, "signal has no AC power");
  const auto bins = detail::band_bins(band, signal.fps, n);
  double in_band = 0.0;
  for (std::size_t m = std::max<std::size_t>(bins.first, 1); m <= bins.last; ++m) {
    in_band += power[m];
  }
  return in_band / total;
}

/// Sum of |h_{i+1} - h_i| over the span between first and last midpoints,
/// in bpm per second.
inline double temporal_variation(const HrSeries& hr) {
  if (hr.size() < 2) fail(ErrorKind::TooFewWindows, "temporal variation needs two windows");
  const double span = hr.estimates.back().time - hr.estimates.front().time;
  if (!(span != 0.0)) fail(ErrorKind::InvalidArgument, "window midpoints coincide");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < hr.size(); ++i) {
    total += std::abs(hr.estimates[i + 1].hr - hr.estimates[i].hr);
  }
  return total / std::abs(span);
}

/// Weights of the two objective terms. The standard objective is k * TV - C;
/// the TV-only ablation drops C by setting concentration_weight to 0.
struct ObjectiveWeights {
  double k = 1.0 / 3.0;
  double concentration_weight = 1.0;
};

struct SpectralScore {
  double concentration = 0.0;
  double tv = 0.0;
  double k = 1.0 / 3.0;
  double concentration_weight = 1.0;
  double objective = 0.0;  // k * tv - concentration_weight * concentration
};

inline SpectralScore make_score(double concentration, double tv, const ObjectiveWeights& w) {
  return {concentration, tv, w.k, w.concentration_weight,
          w.k * tv - w.concentration_weight * concentration};
}

struct ScoredSignal {
  SpectralScore score;
  HrSeries hr;
};

inline ScoredSignal score_signal(const PulseSignal& signal, const WindowPlan& plan,
                                 const FrequencyBand& band, const ObjectiveWeights& weights,
                                 std::size_t n_fft = kDefaultFftBins,
                                 Taper taper = Taper::Rectangular) {
  band.validate(signal.fps);
  auto hr = hr_series(signal, plan, band, n_fft, taper);
  const double tv = temporal_variation(hr);
  const double c = spectral_concentration(signal, band, n_fft);
  return {make_score(c, tv, weights), std::move(hr)};
}

inline SpectralScore objective(const PulseSignal& signal, const WindowPlan& plan,
                               const FrequencyBand& band, double k = 1.0 / 3.0,
                               std::size_t n_fft = kDefaultFftBins,
                               Taper taper = Taper::Rectangular) {
  return score_signal(signal, plan, band, ObjectiveWeights{k, 1.0}, n_fft, taper).score;
}

}  // namespace prism

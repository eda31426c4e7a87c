#pragma once

// Synthetic RGB traces with analytically known heart rate.
//
//   channel_c(t) = base_c * drift_c(t) * (1 + a_c sin phi(t) + h a_c sin 2 phi(t) + eps_c(t))
//
// with phi(t) = 2 pi * integral of hr(tau)/60. The additive variant replaces
// the drift factor by base_c * (drift_c(t) - 1) added on top, to probe a
// mismatch with division-based normalization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "prism/error.hpp"
#include "prism/ground_truth.hpp"
#include "prism/trace.hpp"

namespace prism {

struct HrKnot {
  double time = 0.0;  // seconds from trace start
  double bpm = 72.0;
};

/// Piecewise-linear HR in bpm; constant before the first and after the last knot.
class HrTrajectory {
 public:
  HrTrajectory() : knots_{{0.0, 72.0}} {}
  explicit HrTrajectory(std::vector<HrKnot> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) fail(ErrorKind::Spec, "HR trajectory needs at least one knot");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (!std::isfinite(knots_[i].bpm) || !std::isfinite(knots_[i].time)) {
        fail(ErrorKind::Spec, "HR trajectory knot is not finite");
      }
      if (i > 0 && !(knots_[i].time > knots_[i - 1].time)) {
        fail(ErrorKind::Spec, "HR trajectory knot times must increase");
      }
    }
  }

  static HrTrajectory constant(double bpm) { return HrTrajectory({{0.0, bpm}}); }
  static HrTrajectory linear(double start_bpm, double end_bpm, double duration) {
    return HrTrajectory({{0.0, start_bpm}, {duration, end_bpm}});
  }

  const std::vector<HrKnot>& knots() const noexcept { return knots_; }

  double bpm_at(double t) const {
    if (t <= knots_.front().time) return knots_.front().bpm;
    if (t >= knots_.back().time) return knots_.back().bpm;
    std::size_t i = 1;
    while (knots_[i].time < t) ++i;
    const auto& a = knots_[i - 1];
    const auto& b = knots_[i];
    return a.bpm + (b.bpm - a.bpm) * (t - a.time) / (b.time - a.time);
  }

  /// Beats elapsed in [0, t], i.e. integral of bpm/60 (exact for linear pieces).
  double beats(double t) const {
    auto integral = [&](double from, double to) {
      return 0.5 * (bpm_at(from) + bpm_at(to)) * (to - from) / 60.0;
    };
    double total = 0.0;
    double cursor = 0.0;
    for (const auto& k : knots_) {
      if (k.time <= cursor) continue;
      if (k.time >= t) break;
      total += integral(cursor, k.time);
      cursor = k.time;
    }
    if (t > cursor) total += integral(cursor, t);
    return total;
  }

  double min_bpm() const {
    double m = knots_.front().bpm;
    for (const auto& k : knots_) m = std::min(m, k.bpm);
    return m;
  }
  double max_bpm() const {
    double m = knots_.front().bpm;
    for (const auto& k : knots_) m = std::max(m, k.bpm);
    return m;
  }

 private:
  std::vector<HrKnot> knots_;
};

struct DriftComponent {
  enum class Type { Exponential, Sinusoidal, RegimeSwitch };
  Type type = Type::Exponential;
  double amplitude = 0.0;
  double timescale = 30.0;  // tau, period, or transition width (s)
  double phase = 0.0;       // sinusoidal only, radians
  double at = 0.0;          // regime switch time (s)

  /// Multiplicative factor at time t (seconds from trace start).
  double factor(double t) const {
    switch (type) {
      case Type::Exponential: return 1.0 + amplitude * (1.0 - std::exp(-t / timescale));
      case Type::Sinusoidal:
        return 1.0 + amplitude * std::sin(2.0 * std::numbers::pi * t / timescale + phase);
      case Type::RegimeSwitch: return 1.0 + amplitude / (1.0 + std::exp(-(t - at) / timescale));
    }
    return 1.0;
  }
};

template <typename T>
struct PerChannel {
  T r{};
  T g{};
  T b{};
};

struct SynthSpec {
  double duration = 60.0;  // seconds
  double fps = 30.0;
  double t0 = 0.0;
  HrTrajectory hr;
  PerChannel<double> pulse_amplitude{0.003, 0.01, 0.002};
  PerChannel<double> base{120.0, 100.0, 80.0};
  PerChannel<std::vector<DriftComponent>> drift;
  bool additive_drift = false;
  PerChannel<double> noise_sigma{0.0, 0.0, 0.0};
  double harmonic_ratio = 0.0;
  std::uint64_t seed = 0;
  double window_length = 10.0;  // ground-truth sampling geometry
  double hop = 10.0;

  void set_noise(double sigma) { noise_sigma = {sigma, sigma, sigma}; }
  void set_drift(const std::vector<DriftComponent>& all) { drift = {all, all, all}; }

  void validate() const {
    if (!(duration > 0.0) || !(fps > 0.0) || !std::isfinite(t0)) {
      fail(ErrorKind::Spec, "duration and fps must be > 0");
    }
    if (hr.min_bpm() < kMinPlausibleBpm || hr.max_bpm() > kMaxPlausibleBpm) {
      fail(ErrorKind::Spec, "HR trajectory must stay within [30, 240] bpm");
    }
    for (double v : {pulse_amplitude.r, pulse_amplitude.g, pulse_amplitude.b, noise_sigma.r,
                     noise_sigma.g, noise_sigma.b, harmonic_ratio}) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        fail(ErrorKind::Spec, "amplitudes, noise and harmonic ratio must be finite and >= 0");
      }
    }
    for (double v : {base.r, base.g, base.b}) {
      if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::Spec, "base levels must be > 0");
    }
    for (const auto* list : {&drift.r, &drift.g, &drift.b}) {
      for (const auto& d : *list) {
        if (!(d.timescale > 0.0) || !std::isfinite(d.amplitude)) {
          fail(ErrorKind::Spec, "drift timescale must be > 0 and amplitude finite");
        }
      }
    }
    if (!(window_length > 0.0) || !(hop > 0.0)) {
      fail(ErrorKind::Spec, "window length and hop must be > 0");
    }
  }
};

struct SynthOutput {
  RgbTrace trace;
  GroundTruth truth;  // HR series at the window midpoints
};

namespace detail {
inline double drift_factor(const std::vector<DriftComponent>& parts, double t) {
  double f = 1.0;
  for (const auto& d : parts) f *= d.factor(t);
  return f;
}
}  // namespace detail

/// Deterministic given spec.seed.
inline SynthOutput generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = detail::floor_samples(spec.duration, spec.fps);
  if (n < 4) fail(ErrorKind::Spec, "duration too short for the frame rate");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  std::vector<double> channels[3];
  for (auto& c : channels) c.resize(n);
  const double amp[3] = {spec.pulse_amplitude.r, spec.pulse_amplitude.g, spec.pulse_amplitude.b};
  const double base[3] = {spec.base.r, spec.base.g, spec.base.b};
  const double sigma[3] = {spec.noise_sigma.r, spec.noise_sigma.g, spec.noise_sigma.b};
  const std::vector<DriftComponent>* drift[3] = {&spec.drift.r, &spec.drift.g, &spec.drift.b};

  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / spec.fps;
    const double phi = 2.0 * std::numbers::pi * spec.hr.beats(t);
    const double fundamental = std::sin(phi);
    const double harmonic = spec.harmonic_ratio * std::sin(2.0 * phi);
    for (int c = 0; c < 3; ++c) {
      const double eps = sigma[c] > 0.0 ? sigma[c] * unit(rng) : 0.0;
      const double pulse = amp[c] * (fundamental + harmonic) + eps;
      const double d = detail::drift_factor(*drift[c], t);
      const double v =
          spec.additive_drift ? base[c] * (d + pulse) : base[c] * d * (1.0 + pulse);
      if (!(v > 0.0) || !std::isfinite(v)) {
        fail(ErrorKind::Spec, "generated channel is not positive at sample " + std::to_string(k));
      }
      channels[c][k] = v;
    }
  }

  RgbTrace trace(std::move(channels[0]), std::move(channels[1]), std::move(channels[2]),
                 spec.fps, spec.t0);
  const auto plan = plan_windows(n, spec.fps, spec.t0, spec.window_length, spec.hop);
  std::vector<double> times, values;
  for (const auto& w : plan.windows) {
    times.push_back(w.midpoint_time);
    values.push_back(spec.hr.bpm_at(w.midpoint_time - spec.t0));
  }
  if (times.empty()) fail(ErrorKind::Spec, "trace is shorter than one window");
  return {std::move(trace), GroundTruth(GroundTruthKind::HrSeries, std::move(times),
                                        std::move(values))};
}

}  // namespace prism

#pragma once

// Colour projections from normalized channels to a single pulse signal.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prism/detrend.hpp"
#include "prism/error.hpp"
#include "prism/trace.hpp"

namespace prism {

struct Provenance {
  std::string method;  // "prism", "pos", "green"
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<double> gamma;
};

struct PulseSignal {
  std::vector<double> samples;
  double fps = 0.0;
  double t0 = 0.0;
  Provenance provenance;

  std::size_t size() const noexcept { return samples.size(); }
};

namespace detail {

inline double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Population standard deviation.
inline double stddev_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

/// s = g_hat - (alpha * b_hat + (1 - alpha) * r_hat). alpha = 1 gives G - B,
/// alpha = 0 gives G - R.
inline PulseSignal prism_project(const NormalizedTrace& n, double alpha) {
  if (!std::isfinite(alpha) || alpha < -1.0 || alpha > 1.0) {
    fail(ErrorKind::InvalidArgument, "alpha must lie in [-1, 1]");
  }
  PulseSignal s;
  s.fps = n.fps;
  s.t0 = n.t0;
  s.provenance = {"prism", alpha, std::nullopt, std::nullopt};
  s.samples.resize(n.size());
  for (std::size_t k = 0; k < n.size(); ++k) {
    s.samples[k] = n.g_hat[k] - (alpha * n.b_hat[k] + (1.0 - alpha) * n.r_hat[k]);
  }
  return s;
}

struct PosComponents {
  std::vector<double> s1;  // G - B
  std::vector<double> s2;  // G + B - 2R
};

inline PosComponents pos_components(const NormalizedTrace& n, std::size_t first,
                                    std::size_t last) {
  PosComponents c;
  c.s1.reserve(last - first);
  c.s2.reserve(last - first);
  for (std::size_t k = first; k < last; ++k) {
    c.s1.push_back(n.g_hat[k] - n.b_hat[k]);
    c.s2.push_back(n.g_hat[k] + n.b_hat[k] - 2.0 * n.r_hat[k]);
  }
  return c;
}

/// gamma = sigma(s1) / sigma(s2) over the given components. Throws
/// DegenerateProjection when s2 carries no variance.
inline double pos_gamma(const PosComponents& c) {
  const double sd2 = detail::stddev_of(c.s2);
  const double scale = std::max({1.0, detail::max_abs(c.s1), detail::max_abs(c.s2)});
  if (!(sd2 > 1e-12 * scale)) {
    fail(ErrorKind::DegenerateProjection, "sigma(G + B - 2R) is zero");
  }
  return detail::stddev_of(c.s1) / sd2;
}

/// POS: s1 + gamma * s2 with gamma taken over the whole span.
inline PulseSignal pos_project(const NormalizedTrace& n) {
  const auto c = pos_components(n, 0, n.size());
  const double gamma = pos_gamma(c);
  PulseSignal s;
  s.fps = n.fps;
  s.t0 = n.t0;
  s.provenance = {"pos", std::nullopt, std::nullopt, gamma};
  s.samples.resize(n.size());
  for (std::size_t k = 0; k < n.size(); ++k) s.samples[k] = c.s1[k] + gamma * c.s2[k];
  return s;
}

/// POS with gamma re-estimated per analysis window. Samples after the last
/// window reuse the final window's gamma.
inline PulseSignal pos_project_windowed(const NormalizedTrace& n, const WindowPlan& plan) {
  if (plan.empty()) fail(ErrorKind::InvalidArgument, "empty window plan");
  PulseSignal s;
  s.fps = n.fps;
  s.t0 = n.t0;
  s.provenance = {"pos_windowed", std::nullopt, std::nullopt, std::nullopt};
  s.samples.assign(n.size(), 0.0);
  const auto all = pos_components(n, 0, n.size());
  double gamma = 0.0;
  std::size_t covered = 0;
  for (const auto& w : plan.windows) {
    if (w.end > n.size()) fail(ErrorKind::WindowOutOfRange, "window exceeds signal");
    gamma = pos_gamma(pos_components(n, w.start, w.end));
    for (std::size_t k = std::max(covered, w.start); k < w.end; ++k) {
      s.samples[k] = all.s1[k] + gamma * all.s2[k];
    }
    covered = std::max(covered, w.end);
  }
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (k >= covered) s.samples[k] = all.s1[k] + gamma * all.s2[k];
  }
  return s;
}

/// The PRISM mixing weight equivalent to POS with a given gamma.
constexpr double alpha_from_gamma(double gamma) noexcept { return (1.0 - gamma) / (1.0 + gamma); }

/// GREEN baseline: mean-centred normalized green.
inline PulseSignal green_project(const NormalizedTrace& n) {
  PulseSignal s;
  s.fps = n.fps;
  s.t0 = n.t0;
  s.provenance = {"green", std::nullopt, std::nullopt, std::nullopt};
  const double mu = detail::mean_of(n.g_hat);
  s.samples.resize(n.size());
  for (std::size_t k = 0; k < n.size(); ++k) s.samples[k] = n.g_hat[k] - mu;
  return s;
}

}  // namespace prism

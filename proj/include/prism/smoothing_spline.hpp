#pragma once

// Natural cubic smoothing spline (Reinsch formulation, knots at every sample).
//
// Minimizes  sum_k w_k (h(t_k) - x_k)^2 + lambda * integral h''(t)^2 dt.
// With g = h(t_k) and gamma the second derivatives at the interior knots,
// Q^T g = R gamma and the minimizer satisfies
//
//   (R + lambda Q^T W^{-1} Q) gamma = Q^T x,     g = x - lambda W^{-1} Q gamma,
//
// where R is tridiagonal and Q^T W^{-1} Q pentadiagonal, so one banded LDL^T
// solve gives the fit in O(n).

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "prism/error.hpp"

namespace prism {

struct SplineConfig {
  double lambda = 0.1;          // s^3 when times are in seconds
  std::vector<double> weights;  // empty means uniform (all 1)
};

struct SmoothingSplineFit {
  std::vector<double> values;             // baseline at the sample times
  std::vector<double> second_derivatives; // at every knot; zero at both ends
  std::vector<double> spacing;            // t_{k+1} - t_k

  /// integral of the fitted curve's squared second derivative, gamma^T R gamma.
  double roughness() const {
    const std::size_t n = values.size();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double a = second_derivatives[i];
      const double b = second_derivatives[i + 1];
      // Second derivative is linear on each interval.
      total += spacing[i] * (a * a + a * b + b * b) / 3.0;
    }
    return total;
  }
};

namespace detail {

/// Solves A x = rhs for symmetric positive definite pentadiagonal A given by
/// its main diagonal and first/second super-diagonals. Overwrites rhs.
inline void solve_pentadiagonal_spd(std::span<const double> diag, std::span<const double> off1,
                                    std::span<const double> off2, std::span<double> rhs) {
  const std::size_t m = diag.size();
  std::vector<double> d(m), l1(m, 0.0), l2(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double dj = diag[j];
    if (j >= 1) dj -= l1[j - 1] * l1[j - 1] * d[j - 1];
    if (j >= 2) dj -= l2[j - 2] * l2[j - 2] * d[j - 2];
    if (!(dj > 0.0) || !std::isfinite(dj)) {
      fail(ErrorKind::Numerical, "banded factorization lost positive definiteness at row " +
                                     std::to_string(j));
    }
    d[j] = dj;
    if (j + 1 < m) {
      double v = off1[j];
      if (j >= 1) v -= l2[j - 1] * l1[j - 1] * d[j - 1];
      l1[j] = v / dj;
    }
    if (j + 2 < m) l2[j] = off2[j] / dj;
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (j >= 1) rhs[j] -= l1[j - 1] * rhs[j - 1];
    if (j >= 2) rhs[j] -= l2[j - 2] * rhs[j - 2];
  }
  for (std::size_t j = 0; j < m; ++j) rhs[j] /= d[j];
  for (std::size_t jj = m; jj-- > 0;) {
    if (jj + 1 < m) rhs[jj] -= l1[jj] * rhs[jj + 1];
    if (jj + 2 < m) rhs[jj] -= l2[jj] * rhs[jj + 2];
  }
}

}  // namespace detail

/// Fits the smoothing spline to x sampled at strictly increasing, uniformly
/// spaced times. Throws TooFewSamples (< 4 points), InvalidArgument for bad
/// config or non-uniform times, Numerical if the banded solve breaks down.
inline SmoothingSplineFit fit_smoothing_spline(std::span<const double> x,
                                               std::span<const double> times,
                                               const SplineConfig& cfg) {
  const std::size_t n = x.size();
  if (n < 4) fail(ErrorKind::TooFewSamples, "smoothing spline needs at least 4 samples");
  if (times.size() != n) fail(ErrorKind::InvalidArgument, "times and samples differ in length");
  if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) {
    fail(ErrorKind::InvalidArgument, "lambda must be finite and > 0");
  }
  if (!cfg.weights.empty() && cfg.weights.size() != n) {
    fail(ErrorKind::InvalidArgument, "weights and samples differ in length");
  }
  for (double w : cfg.weights) {
    if (!(w > 0.0) || !std::isfinite(w)) fail(ErrorKind::InvalidArgument, "weights must be > 0");
  }

  SmoothingSplineFit fit;
  fit.spacing.resize(n - 1);
  const double nominal = (times[n - 1] - times[0]) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = times[i + 1] - times[i];
    if (!(h > 0.0)) fail(ErrorKind::InvalidArgument, "times must be strictly increasing");
    if (std::abs(h - nominal) > 1e-6 * nominal) {
      fail(ErrorKind::InvalidArgument, "times must be uniformly spaced");
    }
    fit.spacing[i] = h;
  }
  for (double v : x) {
    if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "samples must be finite");
  }

  const auto& h = fit.spacing;
  auto inv_w = [&](std::size_t i) { return cfg.weights.empty() ? 1.0 : 1.0 / cfg.weights[i]; };

  // Column j of Q (interior knot j = 1..n-2) has entries a, b, c at rows j-1, j, j+1.
  const std::size_t m = n - 2;
  std::vector<double> qa(m), qb(m), qc(m);
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t j = c + 1;
    qa[c] = 1.0 / h[j - 1];
    qc[c] = 1.0 / h[j];
    qb[c] = -qa[c] - qc[c];
  }

  const double lambda = cfg.lambda;
  std::vector<double> diag(m), off1(m, 0.0), off2(m, 0.0), gamma(m);
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t j = c + 1;
    diag[c] = (h[j - 1] + h[j]) / 3.0 +
              lambda * (qa[c] * qa[c] * inv_w(j - 1) + qb[c] * qb[c] * inv_w(j) +
                        qc[c] * qc[c] * inv_w(j + 1));
    if (c + 1 < m) {
      off1[c] = h[j] / 6.0 +
                lambda * (qb[c] * qa[c + 1] * inv_w(j) + qc[c] * qb[c + 1] * inv_w(j + 1));
    }
    if (c + 2 < m) off2[c] = lambda * qc[c] * qa[c + 2] * inv_w(j + 1);
    gamma[c] = (x[j + 1] - x[j]) / h[j] - (x[j] - x[j - 1]) / h[j - 1];
  }

  detail::solve_pentadiagonal_spd(diag, off1, off2, gamma);

  fit.values.assign(x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i) {
    double q_gamma = 0.0;
    if (i >= 2) q_gamma += qc[i - 2] * gamma[i - 2];  // column i-1
    if (i >= 1 && i <= m) q_gamma += qb[i - 1] * gamma[i - 1];  // column i
    if (i < m) q_gamma += qa[i] * gamma[i];  // column i+1
    fit.values[i] -= lambda * inv_w(i) * q_gamma;
    if (!std::isfinite(fit.values[i])) {
      fail(ErrorKind::Numerical, "non-finite spline value at sample " + std::to_string(i));
    }
  }

  fit.second_derivatives.assign(n, 0.0);
  for (std::size_t c = 0; c < m; ++c) fit.second_derivatives[c + 1] = gamma[c];
  return fit;
}

}  // namespace prism

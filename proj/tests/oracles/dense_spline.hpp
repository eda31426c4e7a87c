#pragma once

// Brute-force smoothing spline. The curvature matrix K (g^T K g equals the
// integral of the squared second derivative of the natural interpolating
// spline through g) is built from first principles: interpolate every unit
// vector with a dense natural-spline solve, then integrate products of the
// piecewise linear second derivatives exactly. The fit solves
// (W + lambda K) g = W y by Gaussian elimination with partial pivoting.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline std::vector<double> gauss_solve(Matrix a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (a[piv][col] == 0.0) throw std::runtime_error("singular system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Column j holds the second derivatives at every knot of the natural cubic
/// interpolant through the j-th unit vector.
inline Matrix natural_second_derivative_basis(const std::vector<double>& t) {
  const std::size_t n = t.size();
  Matrix a(n, std::vector<double>(n, 0.0));
  Matrix rhs(n, std::vector<double>(n, 0.0));
  a[0][0] = 1.0;
  a[n - 1][n - 1] = 1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t[i] - t[i - 1];
    const double h1 = t[i + 1] - t[i];
    a[i][i - 1] = h0;
    a[i][i] = 2.0 * (h0 + h1);
    a[i][i + 1] = h1;
    rhs[i][i + 1] = 6.0 / h1;
    rhs[i][i] = -6.0 / h1 - 6.0 / h0;
    rhs[i][i - 1] = 6.0 / h0;
  }
  // Gauss-Jordan with every unit vector as a right-hand side.
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[piv], a[col]);
    std::swap(rhs[piv], rhs[col]);
    const double d = a[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= d;
      rhs[col][c] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const double f = a[r][col];
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        rhs[r][c] -= f * rhs[col][c];
      }
    }
  }
  return rhs;  // rhs[knot][j]
}

inline Matrix curvature_matrix(const std::vector<double>& t) {
  const std::size_t n = t.size();
  const auto m = natural_second_derivative_basis(t);
  Matrix k(n, std::vector<double>(n, 0.0));
  for (std::size_t q = 0; q + 1 < n; ++q) {
    const double h = t[q + 1] - t[q];
    const auto& a = m[q];
    const auto& b = m[q + 1];
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i] == 0.0 && b[i] == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        k[i][j] += h / 6.0 * (2.0 * a[i] * a[j] + a[i] * b[j] + b[i] * a[j] + 2.0 * b[i] * b[j]);
      }
    }
  }
  return k;
}

inline std::vector<double> smoothing_spline(const Matrix& curvature, const std::vector<double>& y,
                                            double lambda, std::vector<double> w = {}) {
  const std::size_t n = y.size();
  if (w.empty()) w.assign(n, 1.0);
  auto a = curvature;
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : a[i]) v *= lambda;
    a[i][i] += w[i];
    rhs[i] = w[i] * y[i];
  }
  return gauss_solve(std::move(a), std::move(rhs));
}

inline std::vector<double> smoothing_spline(const std::vector<double>& t,
                                            const std::vector<double>& y, double lambda,
                                            std::vector<double> w = {}) {
  return smoothing_spline(curvature_matrix(t), y, lambda, std::move(w));
}

/// Value of the penalized objective at g, for optimality checks.
inline double penalized_objective(const std::vector<double>& t, const std::vector<double>& y,
                                  const std::vector<double>& g, double lambda) {
  const auto k = curvature_matrix(t);
  double fit = 0.0, rough = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    fit += (y[i] - g[i]) * (y[i] - g[i]);
    for (std::size_t j = 0; j < y.size(); ++j) rough += g[i] * k[i][j] * g[j];
  }
  return fit + lambda * rough;
}

}  // namespace oracle

#pragma once

// Zero-padded real power spectrum on top of FFTW.

#include <fftw3.h>

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "prism/error.hpp"

namespace prism {

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

constexpr std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace detail {

// FFTW's planner is not re-entrant.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFftPlan {
 public:
  explicit RealFftPlan(std::size_t n) : n_(n) {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    if (in_ == nullptr || out_ == nullptr) {
      fftw_free(in_);
      fftw_free(out_);
      fail(ErrorKind::Numerical, "fftw_malloc failed");
    }
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
    if (plan_ == nullptr) {
      fftw_free(in_);
      fftw_free(out_);
      fail(ErrorKind::Numerical, "fftw plan creation failed");
    }
  }
  RealFftPlan(const RealFftPlan&) = delete;
  RealFftPlan& operator=(const RealFftPlan&) = delete;
  ~RealFftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }

  // |X_m|^2 for m = 0..n/2 of x zero-padded to n.
  void power(std::span<const double> x, std::vector<double>& out) {
    std::fill(in_, in_ + n_, 0.0);
    std::copy(x.begin(), x.end(), in_);
    fftw_execute(plan_);
    out.resize(n_ / 2 + 1);
    for (std::size_t m = 0; m <= n_ / 2; ++m) {
      out[m] = out_[m][0] * out_[m][0] + out_[m][1] * out_[m][1];
    }
  }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

inline RealFftPlan& thread_plan(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFftPlan>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFftPlan>(n);
  return *slot;
}

}  // namespace detail

/// Power spectrum |X_m|^2, m = 0..n_fft/2, of x zero-padded to n_fft bins.
inline std::vector<double> power_spectrum(std::span<const double> x, std::size_t n_fft) {
  if (!is_power_of_two(n_fft)) fail(ErrorKind::InvalidArgument, "n_fft must be a power of two");
  if (x.size() > n_fft) fail(ErrorKind::InvalidArgument, "n_fft is shorter than the input");
  std::vector<double> out;
  detail::thread_plan(n_fft).power(x, out);
  return out;
}

}  // namespace prism

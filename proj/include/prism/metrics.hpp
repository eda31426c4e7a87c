#pragma once

// Windowed HR evaluation: MAE, RMSE, SD of the errors, Pearson R, Acc@threshold.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prism/error.hpp"
#include "prism/spectral.hpp"

namespace prism {

struct WindowError {
  double time = 0.0;
  double predicted = 0.0;
  double truth = 0.0;
  double error = 0.0;  // predicted - truth
};

struct EvalReport {
  double mae = 0.0;
  double rmse = 0.0;
  double sd = 0.0;  // population standard deviation of the errors
  double mean_error = 0.0;
  std::optional<double> pearson_r;  // absent when either series is constant
  double acc_at = 0.0;
  double threshold = 5.0;
  std::size_t n_windows = 0;
  std::vector<WindowError> per_window;
};

enum class Aggregation { PerWindow, PerTrace };

namespace detail {

inline std::optional<double> pearson(std::span<const WindowError> rows) {
  const double n = static_cast<double>(rows.size());
  double mp = 0.0, mt = 0.0;
  for (const auto& r : rows) {
    mp += r.predicted;
    mt += r.truth;
  }
  mp /= n;
  mt /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& r : rows) {
    sxy += (r.predicted - mp) * (r.truth - mt);
    sxx += (r.predicted - mp) * (r.predicted - mp);
    syy += (r.truth - mt) * (r.truth - mt);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline EvalReport report_from_rows(std::vector<WindowError> rows, double threshold) {
  if (rows.empty()) fail(ErrorKind::EmptyInput, "no windows to evaluate");
  EvalReport rep;
  rep.threshold = threshold;
  rep.n_windows = rows.size();
  const double n = static_cast<double>(rows.size());
  double abs_sum = 0.0, sq_sum = 0.0, sum = 0.0;
  std::size_t hits = 0;
  for (const auto& r : rows) {
    abs_sum += std::abs(r.error);
    sq_sum += r.error * r.error;
    sum += r.error;
    if (std::abs(r.error) <= threshold) ++hits;
  }
  rep.mae = abs_sum / n;
  rep.rmse = std::sqrt(sq_sum / n);
  rep.mean_error = sum / n;
  rep.sd = std::sqrt(std::max(0.0, sq_sum / n - rep.mean_error * rep.mean_error));
  rep.acc_at = static_cast<double>(hits) / n;
  rep.pearson_r = pearson(rows);
  rep.per_window = std::move(rows);
  return rep;
}

}  // namespace detail

/// Compares window-aligned series. Midpoints must agree to within
/// `alignment_tolerance` seconds (half a window by default).
inline EvalReport evaluate(const HrSeries& pred, const HrSeries& truth, double threshold = 5.0,
                           double alignment_tolerance = 5.0) {
  if (pred.size() != truth.size()) {
    fail(ErrorKind::Alignment, "prediction has " + std::to_string(pred.size()) +
                                   " windows but reference has " + std::to_string(truth.size()));
  }
  if (pred.size() == 0) fail(ErrorKind::EmptyInput, "no windows to evaluate");
  if (!(threshold >= 0.0)) fail(ErrorKind::InvalidArgument, "threshold must be >= 0");
  std::vector<WindowError> rows;
  rows.reserve(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto& p = pred.estimates[i];
    const auto& t = truth.estimates[i];
    if (std::abs(p.time - t.time) > alignment_tolerance) {
      fail(ErrorKind::Alignment, "window " + std::to_string(i) + " midpoints differ: " +
                                     std::to_string(p.time) + " vs " + std::to_string(t.time));
    }
    rows.push_back({p.time, p.hr, t.hr, p.hr - t.hr});
  }
  return detail::report_from_rows(std::move(rows), threshold);
}

/// Per-window pooling recomputes every metric over the union of windows;
/// per-trace weighting averages each metric over the reports (R over the
/// reports that have one).
inline EvalReport aggregate(std::span<const EvalReport> reports,
                            Aggregation weighting = Aggregation::PerWindow) {
  if (reports.empty()) fail(ErrorKind::EmptyInput, "no reports to aggregate");
  std::vector<WindowError> pooled;
  for (const auto& r : reports) pooled.insert(pooled.end(), r.per_window.begin(), r.per_window.end());
  const double threshold = reports.front().threshold;
  if (weighting == Aggregation::PerWindow) return detail::report_from_rows(std::move(pooled), threshold);

  EvalReport out;
  out.threshold = threshold;
  const double n = static_cast<double>(reports.size());
  double r_sum = 0.0;
  std::size_t r_count = 0;
  for (const auto& r : reports) {
    out.mae += r.mae / n;
    out.rmse += r.rmse / n;
    out.sd += r.sd / n;
    out.mean_error += r.mean_error / n;
    out.acc_at += r.acc_at / n;
    out.n_windows += r.n_windows;
    if (r.pearson_r) {
      r_sum += *r.pearson_r;
      ++r_count;
    }
  }
  if (r_count > 0) out.pearson_r = r_sum / static_cast<double>(r_count);
  out.per_window = std::move(pooled);
  return out;
}

}  // namespace prism

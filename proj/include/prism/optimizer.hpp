#pragma once

// Grid search over (lambda, alpha), dual-band harmonic disambiguation and the
// ablation variants of the search.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <future>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "prism/detrend.hpp"
#include "prism/error.hpp"
#include "prism/projection.hpp"
#include "prism/spectral.hpp"
#include "prism/trace.hpp"

namespace prism {

struct ParamGrid {
  std::vector<double> alphas{0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> lambdas{0.01, 0.05, 0.1, 0.5, 1.0};

  void validate() const {
    if (alphas.empty() || lambdas.empty()) fail(ErrorKind::InvalidArgument, "empty grid axis");
    for (double a : alphas) {
      if (!std::isfinite(a) || a < -1.0 || a > 1.0) {
        fail(ErrorKind::InvalidArgument, "grid alpha " + std::to_string(a) + " outside [-1, 1]");
      }
    }
    for (double l : lambdas) {
      if (!(l > 0.0) || !std::isfinite(l)) {
        fail(ErrorKind::InvalidArgument, "grid lambda " + std::to_string(l) + " must be > 0");
      }
    }
  }
};

struct BandPair {
  FrequencyBand high{0.75, 4.0};
  FrequencyBand low{0.5, 3.0};
  double harmonic_tolerance = 0.05;

  void validate() const {
    if (!(low.f_min < high.f_min && low.f_max < high.f_max)) {
      fail(ErrorKind::InvalidArgument, "low band must sit below the high band");
    }
    if (!(harmonic_tolerance >= 0.0)) {
      fail(ErrorKind::InvalidArgument, "harmonic tolerance must be >= 0");
    }
  }
};

struct AblationMode {
  enum class Kind { Full, FixedAlpha, FixedLambda, ConcentrationOnly, TvOnly };
  Kind kind = Kind::Full;
  double value = 0.0;  // the pinned alpha or lambda for the fixed modes

  static AblationMode full() { return {}; }
  static AblationMode fixed_alpha(double a) { return {Kind::FixedAlpha, a}; }
  static AblationMode fixed_lambda(double l) { return {Kind::FixedLambda, l}; }
  static AblationMode concentration_only() { return {Kind::ConcentrationOnly, 0.0}; }
  static AblationMode tv_only() { return {Kind::TvOnly, 0.0}; }

  void validate() const {
    if (kind == Kind::FixedAlpha && (!std::isfinite(value) || value < -1.0 || value > 1.0)) {
      fail(ErrorKind::InvalidArgument, "fixed alpha must lie in [-1, 1]");
    }
    if (kind == Kind::FixedLambda && (!(value > 0.0) || !std::isfinite(value))) {
      fail(ErrorKind::InvalidArgument, "fixed lambda must be > 0");
    }
  }

  /// "full", "fixed_alpha:<a>", "fixed_lambda:<l>", "concentration_only", "tv_only".
  std::string to_string() const {
    switch (kind) {
      case Kind::Full: return "full";
      case Kind::FixedAlpha: return "fixed_alpha:" + format_value();
      case Kind::FixedLambda: return "fixed_lambda:" + format_value();
      case Kind::ConcentrationOnly: return "concentration_only";
      case Kind::TvOnly: return "tv_only";
    }
    return "full";
  }

  static AblationMode parse(std::string_view text) {
    auto number_after = [&](std::string_view prefix) {
      const std::string rest(text.substr(prefix.size()));
      try {
        std::size_t used = 0;
        const double v = std::stod(rest, &used);
        if (used != rest.size()) throw std::invalid_argument("trailing characters");
        return v;
      } catch (const std::exception&) {
        fail(ErrorKind::InvalidArgument, "bad mode value in '" + std::string(text) + "'");
      }
    };
    AblationMode m;
    if (text == "full") {
      m = full();
    } else if (text == "concentration_only") {
      m = concentration_only();
    } else if (text == "tv_only") {
      m = tv_only();
    } else if (text.starts_with("fixed_alpha:")) {
      m = fixed_alpha(number_after("fixed_alpha:"));
    } else if (text.starts_with("fixed_lambda:")) {
      m = fixed_lambda(number_after("fixed_lambda:"));
    } else {
      fail(ErrorKind::InvalidArgument, "unknown mode '" + std::string(text) + "'");
    }
    m.validate();
    return m;
  }

  bool operator==(const AblationMode&) const = default;

 private:
  std::string format_value() const {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
  }
};

/// Grid actually searched under a mode: fixed modes collapse one axis.
inline ParamGrid effective_grid(const ParamGrid& grid, const AblationMode& mode) {
  ParamGrid g = grid;
  if (mode.kind == AblationMode::Kind::FixedAlpha) g.alphas = {mode.value};
  if (mode.kind == AblationMode::Kind::FixedLambda) g.lambdas = {mode.value};
  return g;
}

inline ObjectiveWeights effective_weights(const AblationMode& mode, double k) {
  switch (mode.kind) {
    case AblationMode::Kind::ConcentrationOnly: return {0.0, 1.0};
    case AblationMode::Kind::TvOnly: return {1.0, 0.0};
    default: return {k, 1.0};
  }
}

struct SearchOptions {
  std::size_t n_fft = kDefaultFftBins;
  Taper taper = Taper::Rectangular;
  bool parallel = false;  // evaluate lambda rows concurrently
};

struct GridCell {
  double lambda = 0.0;
  double alpha = 0.0;
  std::optional<SpectralScore> score;  // empty when the candidate failed
  std::string error;
  HrSeries hr;
};

struct ParamChoice {
  double lambda_star = 0.0;
  double alpha_star = 0.0;
  SpectralScore score;
  FrequencyBand band_used;
  HrSeries hr;                  // windowed HR of the winning candidate
  std::vector<GridCell> all_scores;  // every evaluated cell, lambda-major
};

namespace detail {

// Strict weak order for the argmin: objective, then smaller lambda, then
// smaller alpha. Independent of evaluation order.
inline bool better_cell(const GridCell& a, const GridCell& b) {
  return std::tie(a.score->objective, a.lambda, a.alpha) <
         std::tie(b.score->objective, b.lambda, b.alpha);
}

// Cells for one lambda row, one vector per band.
inline std::vector<std::vector<GridCell>> evaluate_lambda_row(
    const RgbTrace& trace, double lambda, const std::vector<double>& alphas,
    const std::vector<FrequencyBand>& bands, const WindowPlan& plan,
    const ObjectiveWeights& weights, const SearchOptions& opts) {
  std::vector<std::vector<GridCell>> rows(bands.size());
  std::optional<NormalizedTrace> normalized;
  std::string norm_error;
  try {
    normalized = normalize_trace(trace, SplineConfig{lambda, {}});
  } catch (const Error& e) {
    norm_error = e.what();
  }
  for (double alpha : alphas) {
    std::optional<PulseSignal> signal;
    std::string proj_error = norm_error;
    if (normalized) {
      signal = prism_project(*normalized, alpha);
      signal->provenance.lambda = lambda;
    }
    for (std::size_t b = 0; b < bands.size(); ++b) {
      GridCell cell{lambda, alpha, std::nullopt, proj_error, {}};
      if (signal) {
        try {
          auto scored = score_signal(*signal, plan, bands[b], weights, opts.n_fft, opts.taper);
          if (std::isfinite(scored.score.objective)) {
            cell.score = scored.score;
            cell.hr = std::move(scored.hr);
          } else {
            cell.error = "non-finite objective";
          }
        } catch (const Error& e) {
          cell.error = e.what();
        }
      }
      rows[b].push_back(std::move(cell));
    }
  }
  return rows;
}

inline ParamChoice select_best(std::vector<GridCell> cells, const FrequencyBand& band) {
  const GridCell* best = nullptr;
  for (const auto& c : cells) {
    if (c.score && (best == nullptr || better_cell(c, *best))) best = &c;
  }
  if (best == nullptr) {
    std::string first_error = cells.empty() ? "empty grid" : cells.front().error;
    fail(ErrorKind::AllCandidatesFailed, "every grid candidate failed; first: " + first_error);
  }
  ParamChoice choice{best->lambda, best->alpha, *best->score, band, best->hr, {}};
  choice.all_scores = std::move(cells);
  return choice;
}

// Evaluates the grid once per lambda (normalization shared across alphas and
// bands) and returns the cells per band.
inline std::vector<std::vector<GridCell>> evaluate_grid(const RgbTrace& trace,
                                                        const ParamGrid& grid,
                                                        const std::vector<FrequencyBand>& bands,
                                                        const WindowPlan& plan,
                                                        const ObjectiveWeights& weights,
                                                        const SearchOptions& opts) {
  grid.validate();
  for (const auto& b : bands) b.validate(trace.fps());
  if (std::abs(plan.fps - trace.fps()) > 1e-9 * trace.fps() || plan.size() < 2) {
    fail(ErrorKind::InvalidArgument, "window plan must match the trace and hold two windows");
  }
  std::vector<std::vector<std::vector<GridCell>>> rows(grid.lambdas.size());
  if (opts.parallel && grid.lambdas.size() > 1) {
    std::vector<std::future<std::vector<std::vector<GridCell>>>> jobs;
    for (double lambda : grid.lambdas) {
      jobs.push_back(std::async(std::launch::async, [&, lambda] {
        return evaluate_lambda_row(trace, lambda, grid.alphas, bands, plan, weights, opts);
      }));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) rows[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < grid.lambdas.size(); ++i) {
      rows[i] = evaluate_lambda_row(trace, grid.lambdas[i], grid.alphas, bands, plan, weights,
                                    opts);
    }
  }
  std::vector<std::vector<GridCell>> per_band(bands.size());
  for (auto& row : rows) {
    for (std::size_t b = 0; b < bands.size(); ++b) {
      for (auto& cell : row[b]) per_band[b].push_back(std::move(cell));
    }
  }
  return per_band;
}

}  // namespace detail

/// Detrends with each lambda, projects with each alpha, scores in `band`, and
/// returns the argmin of the objective. Ties resolve to the smaller lambda,
/// then the smaller alpha. Failed candidates are kept in the audit grid.
inline ParamChoice grid_search(const RgbTrace& trace, const ParamGrid& grid,
                               const FrequencyBand& band, const WindowPlan& plan,
                               const AblationMode& mode = AblationMode::full(),
                               double k = 1.0 / 3.0, const SearchOptions& opts = {}) {
  mode.validate();
  auto cells = detail::evaluate_grid(trace, effective_grid(grid, mode), {band}, plan,
                                     effective_weights(mode, k), opts);
  return detail::select_best(std::move(cells[0]), band);
}

/// |f_high - 2 f_low| <= tolerance * f_high.
inline bool is_harmonic(double mean_high, double mean_low, double tolerance) {
  return std::abs(mean_high - 2.0 * mean_low) <= tolerance * mean_high;
}

struct DualBandResult {
  ParamChoice choice;  // the selected band's search result
  HrSeries hr;         // windowed HR of the selected candidate
  ParamChoice high;
  ParamChoice low;
  double mean_high_bpm = 0.0;
  double mean_low_bpm = 0.0;
  bool low_selected = false;
};

/// Runs the search independently in the high and low bands. When the
/// high-band mean HR sits at twice the low-band mean (a dominant second
/// harmonic) the low-band result wins, otherwise the high-band one.
inline DualBandResult dual_band_select(const RgbTrace& trace, const ParamGrid& grid,
                                       const BandPair& bands, const WindowPlan& plan,
                                       const AblationMode& mode = AblationMode::full(),
                                       double k = 1.0 / 3.0, const SearchOptions& opts = {}) {
  mode.validate();
  bands.validate();
  auto cells = detail::evaluate_grid(trace, effective_grid(grid, mode), {bands.high, bands.low},
                                     plan, effective_weights(mode, k), opts);
  DualBandResult out;
  out.high = detail::select_best(std::move(cells[0]), bands.high);
  out.low = detail::select_best(std::move(cells[1]), bands.low);
  out.mean_high_bpm = out.high.hr.mean_hr();
  out.mean_low_bpm = out.low.hr.mean_hr();
  out.low_selected = is_harmonic(out.mean_high_bpm, out.mean_low_bpm, bands.harmonic_tolerance);
  out.choice = out.low_selected ? out.low : out.high;
  out.hr = out.choice.hr;
  return out;
}

}  // namespace prism

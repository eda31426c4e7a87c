#pragma once

// Runs the search variants over a corpus of (trace, reference) pairs and
// tabulates their error metrics.

#include <cstddef>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "prism/ground_truth.hpp"
#include "prism/metrics.hpp"
#include "prism/optimizer.hpp"
#include "prism/pipeline.hpp"
#include "prism/trace.hpp"

namespace prism {

struct CorpusItem {
  std::string name;
  RgbTrace trace;
  GroundTruth truth;
};

struct TraceOutcome {
  std::string name;
  std::optional<EvalReport> report;
  double lambda = 0.0;
  double alpha = 0.0;
  std::string error;
};

struct ModeResult {
  AblationMode mode;
  std::string label;
  std::optional<EvalReport> pooled;  // absent when every trace failed
  double mean_lambda = 0.0;          // over successful traces
  double mean_alpha = 0.0;
  std::vector<TraceOutcome> traces;

  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& t : traces) n += t.report ? 0 : 1;
    return n;
  }
};

struct AblationTable {
  ModeResult full;
  ModeResult best_fixed_alpha;
  ModeResult best_fixed_lambda;
  ModeResult concentration_only;
  ModeResult tv_only;
  std::vector<ModeResult> fixed_alpha_sweep;
  std::vector<ModeResult> fixed_lambda_sweep;

  std::vector<const ModeResult*> rows() const {
    return {&full, &best_fixed_alpha, &best_fixed_lambda, &concentration_only, &tv_only};
  }
};

inline TraceOutcome evaluate_trace(const CorpusItem& item, const PipelineSettings& settings,
                                   double threshold) {
  TraceOutcome out;
  out.name = item.name;
  try {
    const auto result = run_pipeline(item.trace, settings);
    const auto plan = plan_windows(item.trace, settings.window_length, settings.hop);
    const auto truth = gt_to_hr_series(item.truth, plan, result.choice.band_used, settings.n_fft,
                                       settings.taper);
    out.report = evaluate(result.hr, truth, threshold, settings.window_length / 2.0);
    out.lambda = result.choice.lambda_star;
    out.alpha = result.choice.alpha_star;
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

/// One search variant over every corpus item. Items run concurrently when
/// `parallel` is set; results keep corpus order.
inline ModeResult run_mode(const std::vector<CorpusItem>& corpus, PipelineSettings settings,
                           const AblationMode& mode, std::string label, Aggregation aggregation,
                           double threshold, bool parallel = false) {
  settings.mode = mode;
  ModeResult res;
  res.mode = mode;
  res.label = std::move(label);
  if (parallel) {
    std::vector<std::future<TraceOutcome>> jobs;
    for (const auto& item : corpus) {
      jobs.push_back(std::async(std::launch::async,
                                [&, s = settings] { return evaluate_trace(item, s, threshold); }));
    }
    for (auto& j : jobs) res.traces.push_back(j.get());
  } else {
    for (const auto& item : corpus) res.traces.push_back(evaluate_trace(item, settings, threshold));
  }
  std::vector<EvalReport> reports;
  for (const auto& t : res.traces) {
    if (!t.report) continue;
    reports.push_back(*t.report);
    res.mean_lambda += t.lambda;
    res.mean_alpha += t.alpha;
  }
  if (!reports.empty()) {
    res.mean_lambda /= static_cast<double>(reports.size());
    res.mean_alpha /= static_cast<double>(reports.size());
    res.pooled = aggregate(reports, aggregation);
  }
  return res;
}

namespace detail {
// Lowest pooled MAE wins; earlier sweep entries win ties.
inline const ModeResult& best_by_mae(const std::vector<ModeResult>& sweep) {
  const ModeResult* best = &sweep.front();
  for (const auto& m : sweep) {
    if (m.pooled && (!best->pooled || m.pooled->mae < best->pooled->mae)) best = &m;
  }
  return *best;
}
}  // namespace detail

/// Full search, every fixed-alpha and fixed-lambda grid value (the best of
/// each sweep is reported), concentration-only and TV-only.
inline AblationTable run_ablation(const std::vector<CorpusItem>& corpus,
                                  const PipelineSettings& settings,
                                  Aggregation aggregation = Aggregation::PerWindow,
                                  double threshold = 5.0, bool parallel = false) {
  if (corpus.empty()) fail(ErrorKind::EmptyInput, "ablation corpus is empty");
  settings.validate();
  AblationTable t;
  t.full = run_mode(corpus, settings, AblationMode::full(), "Full", aggregation, threshold, parallel);
  for (double a : settings.grid.alphas) {
    t.fixed_alpha_sweep.push_back(run_mode(corpus, settings, AblationMode::fixed_alpha(a),
                                           "Fixed alpha", aggregation, threshold, parallel));
  }
  for (double l : settings.grid.lambdas) {
    t.fixed_lambda_sweep.push_back(run_mode(corpus, settings, AblationMode::fixed_lambda(l),
                                            "Fixed lambda", aggregation, threshold, parallel));
  }
  t.best_fixed_alpha = detail::best_by_mae(t.fixed_alpha_sweep);
  t.best_fixed_alpha.label = "Best fixed alpha";
  t.best_fixed_lambda = detail::best_by_mae(t.fixed_lambda_sweep);
  t.best_fixed_lambda.label = "Best fixed lambda";
  t.concentration_only = run_mode(corpus, settings, AblationMode::concentration_only(),
                                  "Concentration-only", aggregation, threshold, parallel);
  t.tv_only = run_mode(corpus, settings, AblationMode::tv_only(), "TV-only", aggregation,
                       threshold, parallel);
  return t;
}

}  // namespace prism

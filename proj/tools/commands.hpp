#pragma once

// Subcommands of the prism tool. Each returns the process exit status and
// writes either its result or an error object to the output stream.
//
// Exit status: 0 success, 1 pipeline failure, 2 usage / input error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prism/ablation.hpp"
#include "prism/prism.hpp"

namespace prism::cli {

enum class Exit : int { Ok = 0, Pipeline = 1, Usage = 2 };

/// Values given on the command line; unset fields fall through to the
/// config file, then to built-in defaults.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<double> fps;
  std::optional<double> window;
  std::optional<double> hop;
  std::optional<std::size_t> nfft;
  std::optional<double> k;
  std::optional<std::vector<double>> alpha_grid;
  std::optional<std::vector<double>> lambda_grid;
  std::optional<std::string> mode;
  std::optional<std::vector<double>> band_high;
  std::optional<std::vector<double>> band_low;
  std::optional<double> harmonic_tol;
  std::optional<std::string> aggregation;
  std::optional<std::string> taper;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
};

struct ErrorCode {
  std::string code;
  Exit exit;
};

inline ErrorCode classify(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return {"E_IO", Exit::Usage};
    case ErrorKind::Parse: return {"E_PARSE", Exit::Usage};
    case ErrorKind::Spec: return {"E_SPEC", Exit::Usage};
    case ErrorKind::EmptyInput: return {"E_EMPTY", Exit::Usage};
    case ErrorKind::InvalidArgument: return {"E_CONFIG", Exit::Usage};
    case ErrorKind::Validation: return {"E_VALIDATION", Exit::Usage};
    case ErrorKind::TooShort:
    case ErrorKind::WindowTooSmall: return {"E_TOO_SHORT", Exit::Usage};
    case ErrorKind::Alignment:
    case ErrorKind::Coverage: return {"E_ALIGN", Exit::Pipeline};
    default: return {"E_PIPELINE", Exit::Pipeline};
  }
}

inline Json error_json(const std::string& code, const std::string& message) {
  return Json{{"error", {{"code", code}, {"message", message}}}};
}

inline int report_error(std::ostream& out, const std::string& code, Exit exit,
                        const std::string& message) {
  out << error_json(code, message).dump(2) << '\n';
  return static_cast<int>(exit);
}

inline int report_error(std::ostream& out, const Error& e) {
  const auto c = classify(e.kind());
  return report_error(out, c.code, c.exit, e.what());
}

/// Runs `body`, turning library errors into an error object and exit status.
template <class F>
int guarded(std::ostream& out, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return report_error(out, e);
  } catch (const std::exception& e) {
    return report_error(out, "E_PIPELINE", Exit::Pipeline, e.what());
  }
}

namespace detail {

inline FrequencyBand band_of(const std::vector<double>& v, const char* flag) {
  if (v.size() != 2) fail(ErrorKind::InvalidArgument, std::string(flag) + " takes two values");
  return {v[0], v[1]};
}

inline Json load_json(const std::filesystem::path& path, ErrorKind on_parse) {
  const auto text = prism::detail::read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    fail(on_parse, path.string() + ": " + e.what());
  }
}

inline void emit(const Json& doc, const std::optional<std::string>& path, std::ostream& out) {
  if (path) {
    prism::detail::write_file(*path, doc.dump(2) + "\n");
  } else {
    out << doc.dump(2) << '\n';
  }
}

// Sibling of `path` with its extension replaced.
inline std::filesystem::path sibling(const std::filesystem::path& path, const std::string& suffix) {
  auto p = path;
  p.replace_extension();
  p += suffix;
  return p;
}

}  // namespace detail

/// Defaults, then the config file, then flags.
inline PipelineConfig resolve_config(const Overrides& o) {
  PipelineConfig c;
  if (o.config_path) {
    apply_config_json(c, detail::load_json(*o.config_path, ErrorKind::InvalidArgument));
  }
  auto& p = c.pipeline;
  if (o.window) p.window_length = *o.window;
  if (o.hop) p.hop = *o.hop;
  if (o.nfft) p.n_fft = *o.nfft;
  if (o.k) p.k = *o.k;
  if (o.alpha_grid) p.grid.alphas = *o.alpha_grid;
  if (o.lambda_grid) p.grid.lambdas = *o.lambda_grid;
  if (o.mode) p.mode = AblationMode::parse(*o.mode);
  if (o.band_high) p.bands.high = detail::band_of(*o.band_high, "--band-high");
  if (o.band_low) p.bands.low = detail::band_of(*o.band_low, "--band-low");
  if (o.harmonic_tol) p.bands.harmonic_tolerance = *o.harmonic_tol;
  if (o.aggregation) c.aggregation = parse_aggregation(*o.aggregation);
  if (o.taper) p.taper = parse_taper(*o.taper);
  if (o.threshold) c.threshold = *o.threshold;
  p.validate();
  if (!(c.threshold > 0.0)) fail(ErrorKind::InvalidArgument, "threshold must be > 0");
  return c;
}

struct ExtractOptions {
  std::optional<std::string> baseline_dump;  // CSV of fitted baselines at the selected lambda
  bool online = false;
};

inline std::string baseline_csv(const RgbTrace& trace, double lambda) {
  const auto base = fit_baselines(trace, SplineConfig{lambda, {}});
  using prism::detail::format_double;
  std::string out = "t,r,g,b,r_base,g_base,b_base\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out += format_double(trace.time(k)) + ',' + format_double(trace.r()[k]) + ',' +
           format_double(trace.g()[k]) + ',' + format_double(trace.b()[k]) + ',' +
           format_double(base.r[k]) + ',' + format_double(base.g[k]) + ',' +
           format_double(base.b[k]) + '\n';
  }
  return out;
}

inline Json online_json(const std::vector<OnlineEstimate>& est,
                        const std::vector<RefreshRecord>& refreshes) {
  auto windows = Json::array();
  for (const auto& e : est) {
    windows.push_back({{"t", e.time}, {"hr", e.hr}, {"lambda", e.lambda}, {"alpha", e.alpha},
                       {"band", to_json(e.band)}});
  }
  auto recs = Json::array();
  for (const auto& r : refreshes) {
    Json j{{"t", r.time}, {"buffer_start", r.buffer_start}, {"ok", r.ok}};
    if (r.ok) {
      j["selection"] = to_json(r.result->choice);
    } else {
      j["error"] = r.error;
    }
    recs.push_back(std::move(j));
  }
  return Json{{"windows", std::move(windows)}, {"refreshes", std::move(recs)}};
}

inline int cmd_extract(const std::string& trace_path, const Overrides& o,
                       const ExtractOptions& x = {}, std::ostream& out = std::cout) {
  return guarded(out, [&] {
    const auto cfg = resolve_config(o);
    const auto trace = load_trace(trace_path, o.fps, cfg.pipeline.window_length);
    Json doc{{"config", to_json(cfg)},
             {"input",
              {{"path", trace_path},
               {"samples", trace.size()},
               {"fps", trace.fps()},
               {"t0", trace.t0()},
               {"duration", trace.duration()}}}};
    if (x.online) {
      std::vector<RefreshRecord> refreshes;
      const auto est = run_online(trace, cfg.pipeline, cfg.online, &refreshes);
      doc["online"] = online_json(est, refreshes);
    } else {
      const auto result = run_pipeline(trace, cfg.pipeline);
      doc.update(to_json(result));
      if (x.baseline_dump) {
        prism::detail::write_file(*x.baseline_dump,
                                  baseline_csv(trace, result.choice.lambda_star));
      }
    }
    detail::emit(doc, o.output, out);
    return 0;
  });
}

/// Reads predictions from an extract JSON document or a `t,hr` CSV.
inline HrSeries load_predictions(const std::filesystem::path& path) {
  const auto text = prism::detail::read_file(path);
  HrSeries hr;
  if (prism::detail::looks_like_json(path, text)) {
    try {
      const auto doc = Json::parse(text);
      const auto& rows = doc.contains("windows") ? doc["windows"] : doc.at("online").at("windows");
      for (const auto& w : rows) hr.estimates.push_back({w.at("t").get<double>(), w.at("hr").get<double>()});
      if (doc.contains("selection")) hr.band = band_from_json(doc["selection"]["band"]);
    } catch (const Json::exception& e) {
      fail(ErrorKind::Parse, path.string() + ": " + e.what());
    }
    return hr;
  }
  const auto gt = parse_ground_truth(text);
  if (gt.kind() != GroundTruthKind::HrSeries) {
    fail(ErrorKind::Parse, path.string() + ": predictions must be a t,hr table");
  }
  for (std::size_t i = 0; i < gt.size(); ++i) hr.estimates.push_back({gt.times()[i], gt.values()[i]});
  return hr;
}

/// Reference HR at each predicted window midpoint. Raw PPG references are
/// cut into windows of the configured length centred on those midpoints.
inline HrSeries reference_for(const GroundTruth& gt, const HrSeries& pred,
                              const PipelineConfig& cfg) {
  if (pred.estimates.empty()) fail(ErrorKind::Alignment, "prediction file has no windows");
  const double wl = cfg.pipeline.window_length;
  const double fps = gt.kind() == GroundTruthKind::RawPpg ? gt.fps() : 1.0;
  WindowPlan plan;
  plan.window_length = wl;
  plan.hop = cfg.pipeline.hop;
  plan.fps = fps;
  plan.t0 = 0.0;
  plan.samples_per_window = std::max<std::size_t>(1, static_cast<std::size_t>(wl * fps + 1e-9));
  for (const auto& e : pred.estimates) {
    const double start = std::max(0.0, (e.time - wl / 2.0) * fps);
    const auto first = static_cast<std::size_t>(std::llround(start));
    plan.windows.push_back({first, first + plan.samples_per_window, e.time});
  }
  return gt_to_hr_series(gt, plan, pred.band, cfg.pipeline.n_fft, cfg.pipeline.taper);
}

inline int cmd_eval(const std::string& pred_path, const std::string& gt_path, const Overrides& o,
                    std::ostream& out = std::cout) {
  return guarded(out, [&] {
    const auto cfg = resolve_config(o);
    const auto pred = load_predictions(pred_path);
    const auto gt = load_ground_truth(gt_path);
    const auto truth = reference_for(gt, pred, cfg);
    const auto report = evaluate(pred, truth, cfg.threshold, cfg.pipeline.window_length / 2.0);
    Json doc{{"config", to_json(cfg)},
             {"prediction", pred_path},
             {"ground_truth", gt_path},
             {"warnings", gt.warnings()},
             {"report", to_json(report)}};
    if (o.output) {
      prism::detail::write_file(detail::sibling(*o.output, "_windows.csv"), per_window_csv(report));
    }
    detail::emit(doc, o.output, out);
    return 0;
  });
}

/// Pairs `<name>.trace.csv|json` with `<name>.gt.csv`, sorted by name.
inline std::vector<std::pair<std::string, std::pair<std::filesystem::path, std::filesystem::path>>>
find_pairs(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorKind::Io, "not a directory: " + dir.string());
  std::map<std::string, std::pair<fs::path, fs::path>> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    for (const std::string suffix : {".trace.csv", ".trace.json"}) {
      if (name.size() > suffix.size() && name.ends_with(suffix)) {
        const auto stem = name.substr(0, name.size() - suffix.size());
        const auto gt = dir / (stem + ".gt.csv");
        if (fs::exists(gt)) found[stem] = {entry.path(), gt};
      }
    }
  }
  return {found.begin(), found.end()};
}

inline Json mode_json(const ModeResult& m) {
  Json j{{"configuration", m.label},
         {"mode", m.mode.to_string()},
         {"n_traces", m.traces.size()},
         {"n_failed", m.failures()}};
  if (m.pooled) {
    j["mae"] = m.pooled->mae;
    j["rmse"] = m.pooled->rmse;
    j["acc"] = m.pooled->acc_at;
    j["pearson_r"] = m.pooled->pearson_r ? Json(*m.pooled->pearson_r) : Json(nullptr);
    j["mean_lambda"] = m.mean_lambda;
    j["mean_alpha"] = m.mean_alpha;
  } else {
    for (const char* key : {"mae", "rmse", "acc", "pearson_r", "mean_lambda", "mean_alpha"}) {
      j[key] = nullptr;
    }
  }
  auto per = Json::array();
  for (const auto& t : m.traces) {
    Json r{{"trace", t.name}};
    if (t.report) {
      r["mae"] = t.report->mae;
      r["lambda"] = t.lambda;
      r["alpha"] = t.alpha;
    } else {
      r["error"] = t.error;
    }
    per.push_back(std::move(r));
  }
  j["traces"] = std::move(per);
  return j;
}

inline std::string ablation_csv(const AblationTable& t) {
  using prism::detail::format_double;
  auto num = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  std::string out = "configuration,mode,mae,rmse,acc,mean_lambda,mean_alpha,n_traces,n_failed\n";
  for (const auto* m : t.rows()) {
    const bool ok = m->pooled.has_value();
    out += m->label + ',' + m->mode.to_string() + ',' +
           num(ok ? std::optional(m->pooled->mae) : std::nullopt) + ',' +
           num(ok ? std::optional(m->pooled->rmse) : std::nullopt) + ',' +
           num(ok ? std::optional(m->pooled->acc_at) : std::nullopt) + ',' +
           num(ok ? std::optional(m->mean_lambda) : std::nullopt) + ',' +
           num(ok ? std::optional(m->mean_alpha) : std::nullopt) + ',' +
           std::to_string(m->traces.size()) + ',' + std::to_string(m->failures()) + '\n';
  }
  return out;
}

inline int cmd_ablate(const std::string& dir, const Overrides& o, bool parallel = true,
                      std::ostream& out = std::cout) {
  return guarded(out, [&] {
    const auto cfg = resolve_config(o);
    const auto pairs = find_pairs(dir);
    if (pairs.empty()) fail(ErrorKind::EmptyInput, "no <name>.trace.csv + <name>.gt.csv pairs in " + dir);
    std::vector<CorpusItem> corpus;
    auto load_failures = Json::array();
    for (const auto& [name, paths] : pairs) {
      try {
        corpus.push_back({name, load_trace(paths.first, o.fps, cfg.pipeline.window_length),
                          load_ground_truth(paths.second)});
      } catch (const Error& e) {
        load_failures.push_back({{"trace", name}, {"error", e.what()}});
      }
    }
    if (corpus.empty()) fail(ErrorKind::EmptyInput, "no loadable trace pairs in " + dir);
    const auto table = run_ablation(corpus, cfg.pipeline, cfg.aggregation, cfg.threshold, parallel);
    auto rows = Json::array();
    for (const auto* m : table.rows()) rows.push_back(mode_json(*m));
    auto sweep = [](const std::vector<ModeResult>& v) {
      auto a = Json::array();
      for (const auto& m : v) a.push_back(mode_json(m));
      return a;
    };
    Json doc{{"config", to_json(cfg)},
             {"directory", dir},
             {"rows", std::move(rows)},
             {"sweeps",
              {{"fixed_alpha", sweep(table.fixed_alpha_sweep)},
               {"fixed_lambda", sweep(table.fixed_lambda_sweep)}}},
             {"load_failures", std::move(load_failures)}};
    if (o.output) prism::detail::write_file(detail::sibling(*o.output, ".csv"), ablation_csv(table));
    detail::emit(doc, o.output, out);
    return 0;
  });
}

/// Writes `<prefix>.trace.csv` (or `.trace.json`) and `<prefix>.gt.csv`.
inline int cmd_synth(const std::string& spec_path, const Overrides& o, bool json_trace = false,
                     std::ostream& out = std::cout) {
  return guarded(out, [&] {
    if (!o.output) fail(ErrorKind::InvalidArgument, "synth needs --output <prefix>");
    SynthSpec spec;
    const auto doc = detail::load_json(spec_path, ErrorKind::Spec);
    try {
      spec = synth_spec_from_json(doc);
      if (o.seed) spec.seed = *o.seed;
      if (o.fps) spec.fps = *o.fps;
      spec.validate();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Spec) throw;
      fail(ErrorKind::Spec, e.what());
    }
    const auto synth = generate(spec);
    const std::string prefix = *o.output;
    const std::string trace_path = prefix + (json_trace ? ".trace.json" : ".trace.csv");
    const std::string gt_path = prefix + ".gt.csv";
    write_trace(synth.trace, trace_path);
    write_ground_truth(synth.truth, gt_path);
    out << Json{{"spec", to_json(spec)}, {"trace", trace_path}, {"ground_truth", gt_path}}.dump(2)
        << '\n';
    return 0;
  });
}

}  // namespace prism::cli

#pragma once

// JSON / CSV forms of configuration, synthetic specs and pipeline results.

#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "prism/error.hpp"
#include "prism/io.hpp"
#include "prism/metrics.hpp"
#include "prism/online.hpp"
#include "prism/optimizer.hpp"
#include "prism/pipeline.hpp"
#include "prism/synth.hpp"

namespace prism {

using Json = nlohmann::json;

/// Full configuration surface of the command-line tool.
struct PipelineConfig {
  PipelineSettings pipeline;
  Aggregation aggregation = Aggregation::PerWindow;
  double threshold = 5.0;  // Acc@ threshold, bpm
  OnlineSettings online;
};

inline std::string_view to_string(Taper t) { return t == Taper::Hann ? "hann" : "rectangular"; }
inline std::string_view to_string(Aggregation a) {
  return a == Aggregation::PerTrace ? "per_trace" : "per_window";
}

inline Taper parse_taper(std::string_view s) {
  if (s == "rectangular") return Taper::Rectangular;
  if (s == "hann") return Taper::Hann;
  fail(ErrorKind::InvalidArgument, "taper must be rectangular or hann");
}

inline Aggregation parse_aggregation(std::string_view s) {
  if (s == "per_window") return Aggregation::PerWindow;
  if (s == "per_trace") return Aggregation::PerTrace;
  fail(ErrorKind::InvalidArgument, "aggregation must be per_window or per_trace");
}

inline Json to_json(const FrequencyBand& b) { return Json::array({b.f_min, b.f_max}); }

inline FrequencyBand band_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) fail(ErrorKind::InvalidArgument, "band must be [f_min, f_max]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json to_json(const PipelineConfig& c) {
  const auto& p = c.pipeline;
  return Json{
      {"window_length", p.window_length},
      {"hop", p.hop},
      {"n_fft", p.n_fft},
      {"k", p.k},
      {"grid", {{"alphas", p.grid.alphas}, {"lambdas", p.grid.lambdas}}},
      {"bands", {{"high", to_json(p.bands.high)}, {"low", to_json(p.bands.low)}}},
      {"harmonic_tolerance", p.bands.harmonic_tolerance},
      {"mode", p.mode.to_string()},
      {"taper", to_string(p.taper)},
      {"aggregation", to_string(c.aggregation)},
      {"threshold", c.threshold},
      {"online",
       {{"init_duration", c.online.init_duration},
        {"refresh_interval", c.online.refresh_interval},
        {"buffer_cap", c.online.buffer_cap},
        {"default_lambda", c.online.default_lambda},
        {"default_alpha", c.online.default_alpha}}},
  };
}

/// Overrides the fields present in `j`; unknown keys are rejected.
inline void apply_config_json(PipelineConfig& c, const Json& j) {
  static const std::set<std::string> known{
      "window_length", "hop",   "n_fft",     "k",           "grid",      "bands",
      "harmonic_tolerance", "mode", "taper", "aggregation", "threshold", "online"};
  if (!j.is_object()) fail(ErrorKind::InvalidArgument, "config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.contains(key)) fail(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
    }
    auto& p = c.pipeline;
    if (j.contains("window_length")) p.window_length = j["window_length"].get<double>();
    if (j.contains("hop")) p.hop = j["hop"].get<double>();
    if (j.contains("n_fft")) p.n_fft = j["n_fft"].get<std::size_t>();
    if (j.contains("k")) p.k = j["k"].get<double>();
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      if (g.contains("alphas")) p.grid.alphas = g["alphas"].get<std::vector<double>>();
      if (g.contains("lambdas")) p.grid.lambdas = g["lambdas"].get<std::vector<double>>();
    }
    if (j.contains("bands")) {
      const auto& b = j["bands"];
      if (b.contains("high")) p.bands.high = band_from_json(b["high"]);
      if (b.contains("low")) p.bands.low = band_from_json(b["low"]);
    }
    if (j.contains("harmonic_tolerance")) {
      p.bands.harmonic_tolerance = j["harmonic_tolerance"].get<double>();
    }
    if (j.contains("mode")) p.mode = AblationMode::parse(j["mode"].get<std::string>());
    if (j.contains("taper")) p.taper = parse_taper(j["taper"].get<std::string>());
    if (j.contains("aggregation")) {
      c.aggregation = parse_aggregation(j["aggregation"].get<std::string>());
    }
    if (j.contains("threshold")) c.threshold = j["threshold"].get<double>();
    if (j.contains("online")) {
      const auto& o = j["online"];
      if (o.contains("init_duration")) c.online.init_duration = o["init_duration"].get<double>();
      if (o.contains("refresh_interval")) {
        c.online.refresh_interval = o["refresh_interval"].get<double>();
      }
      if (o.contains("buffer_cap")) c.online.buffer_cap = o["buffer_cap"].get<double>();
      if (o.contains("default_lambda")) c.online.default_lambda = o["default_lambda"].get<double>();
      if (o.contains("default_alpha")) c.online.default_alpha = o["default_alpha"].get<double>();
    }
  } catch (const Json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("bad config value: ") + e.what());
  }
}

inline Json to_json(const SpectralScore& s) {
  return Json{{"concentration", s.concentration},
              {"tv", s.tv},
              {"k", s.k},
              {"concentration_weight", s.concentration_weight},
              {"objective", s.objective}};
}

inline Json to_json(const HrSeries& hr) {
  auto rows = Json::array();
  for (const auto& e : hr.estimates) rows.push_back({{"t", e.time}, {"hr", e.hr}});
  return rows;
}

inline Json audit_json(const ParamChoice& c) {
  auto cells = Json::array();
  for (const auto& cell : c.all_scores) {
    Json j{{"lambda", cell.lambda}, {"alpha", cell.alpha}};
    if (cell.score) {
      j["score"] = to_json(*cell.score);
    } else {
      j["error"] = cell.error;
    }
    cells.push_back(std::move(j));
  }
  return cells;
}

inline Json to_json(const ParamChoice& c) {
  return Json{{"lambda", c.lambda_star},
              {"alpha", c.alpha_star},
              {"band", to_json(c.band_used)},
              {"score", to_json(c.score)},
              {"mean_hr", c.hr.mean_hr()}};
}

inline Json to_json(const DualBandResult& r) {
  return Json{
      {"selection", to_json(r.choice)},
      {"windows", to_json(r.hr)},
      {"harmonic",
       {{"mean_high_bpm", r.mean_high_bpm},
        {"mean_low_bpm", r.mean_low_bpm},
        {"low_band_selected", r.low_selected}}},
      {"bands", {{"high", to_json(r.high)}, {"low", to_json(r.low)}}},
      {"audit", {{"high", audit_json(r.high)}, {"low", audit_json(r.low)}}},
  };
}

inline Json to_json(const EvalReport& r) {
  Json j{{"mae", r.mae},
         {"rmse", r.rmse},
         {"sd", r.sd},
         {"mean_error", r.mean_error},
         {"pearson_r", r.pearson_r ? Json(*r.pearson_r) : Json(nullptr)},
         {"acc", r.acc_at},
         {"threshold", r.threshold},
         {"n_windows", r.n_windows}};
  auto rows = Json::array();
  for (const auto& w : r.per_window) {
    rows.push_back({{"t", w.time}, {"predicted", w.predicted}, {"truth", w.truth}, {"error", w.error}});
  }
  j["per_window"] = std::move(rows);
  return j;
}

inline std::string per_window_csv(const EvalReport& r) {
  std::string out = "t,predicted,truth,error\n";
  for (const auto& w : r.per_window) {
    out += detail::format_double(w.time) + ',' + detail::format_double(w.predicted) + ',' +
           detail::format_double(w.truth) + ',' + detail::format_double(w.error) + '\n';
  }
  return out;
}

namespace detail {

inline PerChannel<double> channels_from_json(const Json& j, PerChannel<double> fallback) {
  if (j.is_number()) {
    const double v = j.get<double>();
    return {v, v, v};
  }
  if (j.contains("r")) fallback.r = j["r"].get<double>();
  if (j.contains("g")) fallback.g = j["g"].get<double>();
  if (j.contains("b")) fallback.b = j["b"].get<double>();
  return fallback;
}

inline DriftComponent drift_from_json(const Json& j) {
  DriftComponent d;
  const auto type = j.at("type").get<std::string>();
  d.amplitude = j.value("amplitude", 0.0);
  if (type == "exponential") {
    d.type = DriftComponent::Type::Exponential;
    d.timescale = j.value("timescale", 30.0);
  } else if (type == "sinusoidal") {
    d.type = DriftComponent::Type::Sinusoidal;
    d.timescale = j.value("period", 20.0);
    d.phase = j.value("phase", 0.0);
  } else if (type == "regime_switch") {
    d.type = DriftComponent::Type::RegimeSwitch;
    d.at = j.at("at").get<double>();
    d.timescale = j.value("width", 1.0);
  } else {
    fail(ErrorKind::Spec, "unknown drift type '" + type + "'");
  }
  return d;
}

inline std::vector<DriftComponent> drift_list(const Json& j) {
  std::vector<DriftComponent> out;
  for (const auto& c : j) out.push_back(drift_from_json(c));
  return out;
}

inline Json drift_to_json(const std::vector<DriftComponent>& parts) {
  auto out = Json::array();
  for (const auto& d : parts) {
    switch (d.type) {
      case DriftComponent::Type::Exponential:
        out.push_back({{"type", "exponential"}, {"amplitude", d.amplitude}, {"timescale", d.timescale}});
        break;
      case DriftComponent::Type::Sinusoidal:
        out.push_back({{"type", "sinusoidal"},
                       {"amplitude", d.amplitude},
                       {"period", d.timescale},
                       {"phase", d.phase}});
        break;
      case DriftComponent::Type::RegimeSwitch:
        out.push_back({{"type", "regime_switch"},
                       {"amplitude", d.amplitude},
                       {"at", d.at},
                       {"width", d.timescale}});
        break;
    }
  }
  return out;
}

}  // namespace detail

/// Reads a synthetic-trace spec; missing fields keep their defaults. Any
/// malformed or out-of-range field raises SpecError.
inline SynthSpec synth_spec_from_json(const Json& j) {
  SynthSpec s;
  try {
    s.duration = j.value("duration", s.duration);
    s.fps = j.value("fps", s.fps);
    s.t0 = j.value("t0", s.t0);
    if (j.contains("hr")) {
      const auto& h = j["hr"];
      const auto type = h.value("type", std::string("constant"));
      if (type == "constant") {
        s.hr = HrTrajectory::constant(h.at("bpm").get<double>());
      } else if (type == "linear") {
        s.hr = HrTrajectory::linear(h.at("start_bpm").get<double>(), h.at("end_bpm").get<double>(),
                                    s.duration);
      } else if (type == "piecewise") {
        std::vector<HrKnot> knots;
        for (const auto& k : h.at("knots")) knots.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
        s.hr = HrTrajectory(std::move(knots));
      } else {
        fail(ErrorKind::Spec, "unknown hr type '" + type + "'");
      }
    }
    if (j.contains("pulse_amplitude")) {
      s.pulse_amplitude = detail::channels_from_json(j["pulse_amplitude"], s.pulse_amplitude);
    }
    if (j.contains("base")) s.base = detail::channels_from_json(j["base"], s.base);
    if (j.contains("noise_sigma")) {
      s.noise_sigma = detail::channels_from_json(j["noise_sigma"], s.noise_sigma);
    }
    if (j.contains("drift")) {
      const auto& d = j["drift"];
      if (d.is_array()) {
        s.set_drift(detail::drift_list(d));
      } else {
        if (d.contains("r")) s.drift.r = detail::drift_list(d["r"]);
        if (d.contains("g")) s.drift.g = detail::drift_list(d["g"]);
        if (d.contains("b")) s.drift.b = detail::drift_list(d["b"]);
      }
    }
    if (j.contains("drift_mode")) {
      const auto mode = j["drift_mode"].get<std::string>();
      if (mode != "multiplicative" && mode != "additive") {
        fail(ErrorKind::Spec, "drift_mode must be multiplicative or additive");
      }
      s.additive_drift = mode == "additive";
    }
    s.harmonic_ratio = j.value("harmonic_ratio", s.harmonic_ratio);
    s.seed = j.value("seed", s.seed);
    s.window_length = j.value("window_length", s.window_length);
    s.hop = j.value("hop", s.hop);
  } catch (const Json::exception& e) {
    fail(ErrorKind::Spec, std::string("malformed synth spec: ") + e.what());
  }
  s.validate();
  return s;
}

inline Json to_json(const SynthSpec& s) {
  auto knots = Json::array();
  for (const auto& k : s.hr.knots()) knots.push_back({k.time, k.bpm});
  auto channels = [](const PerChannel<double>& c) { return Json{{"r", c.r}, {"g", c.g}, {"b", c.b}}; };
  return Json{{"duration", s.duration},
              {"fps", s.fps},
              {"t0", s.t0},
              {"hr", {{"type", "piecewise"}, {"knots", knots}}},
              {"pulse_amplitude", channels(s.pulse_amplitude)},
              {"base", channels(s.base)},
              {"noise_sigma", channels(s.noise_sigma)},
              {"drift",
               {{"r", detail::drift_to_json(s.drift.r)},
                {"g", detail::drift_to_json(s.drift.g)},
                {"b", detail::drift_to_json(s.drift.b)}}},
              {"drift_mode", s.additive_drift ? "additive" : "multiplicative"},
              {"harmonic_ratio", s.harmonic_ratio},
              {"seed", s.seed},
              {"window_length", s.window_length},
              {"hop", s.hop}};
}

}  // namespace prism

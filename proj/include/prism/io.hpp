#pragma once

// Trace and ground-truth file formats.
//
// Trace CSV:   optional "# fps=<float>" / "# t0=<float>" comment lines, a
//              header row "r,g,b", then one "r,g,b" row per frame.
// Trace JSON:  {"fps": f, "t0": f, "rgb": [[r, g, b], ...]}
// Truth CSV:   header "t,hr" (bpm) or "t,ppg" (raw amplitude), then rows.
//
// Numbers are written in shortest round-trip form, so write -> load
// reproduces every finite double bit for bit.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "prism/error.hpp"
#include "prism/ground_truth.hpp"
#include "prism/trace.hpp"

namespace prism {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

struct RawTrace {
  std::vector<double> r, g, b;
  std::optional<double> fps;
  double t0 = 0.0;
};

inline RawTrace parse_trace_csv(std::string_view text) {
  RawTrace raw;
  bool header_seen = false;
  std::size_t row = 0;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto line = trim(lines[ln]);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = lower(trim(body.substr(0, eq)));
      if (key != "fps" && key != "t0") continue;
      const auto v = parse_double(body.substr(eq + 1));
      if (!v) fail(ErrorKind::Parse, "line " + std::to_string(ln + 1) + ": bad " + key + " value");
      if (key == "fps") raw.fps = *v;
      else raw.t0 = *v;
      continue;
    }
    if (!header_seen) {
      const auto header = lower(line);
      if (split_commas(header) != std::vector<std::string_view>{"r", "g", "b"}) {
        fail(ErrorKind::Parse, "line " + std::to_string(ln + 1) + ": expected header r,g,b");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_commas(line);
    if (fields.size() != 3) {
      fail(ErrorKind::Parse, "row " + std::to_string(row) + " (line " + std::to_string(ln + 1) +
                                 "): expected 3 fields");
    }
    double v[3];
    for (int c = 0; c < 3; ++c) {
      const auto parsed = parse_double(fields[static_cast<std::size_t>(c)]);
      if (!parsed) {
        fail(ErrorKind::Parse, "row " + std::to_string(row) + " (line " + std::to_string(ln + 1) +
                                   "): not a number");
      }
      v[c] = *parsed;
    }
    raw.r.push_back(v[0]);
    raw.g.push_back(v[1]);
    raw.b.push_back(v[2]);
    ++row;
  }
  if (!header_seen) fail(ErrorKind::Parse, "missing r,g,b header");
  return raw;
}

inline RawTrace parse_trace_json(std::string_view text) {
  RawTrace raw;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.contains("fps") && !doc["fps"].is_null()) raw.fps = doc["fps"].get<double>();
    if (doc.contains("t0")) raw.t0 = doc["t0"].get<double>();
    const auto& rows = doc.at("rgb");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (!row.is_array() || row.size() != 3) {
        fail(ErrorKind::Parse, "row " + std::to_string(i) + ": expected [r, g, b]");
      }
      raw.r.push_back(row[0].get<double>());
      raw.g.push_back(row[1].get<double>());
      raw.b.push_back(row[2].get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("malformed trace JSON: ") + e.what());
  }
  return raw;
}

inline bool looks_like_json(const std::filesystem::path& path, std::string_view text) {
  if (lower(path.extension().string()) == ".json") return true;
  const auto t = trim(text);
  return !t.empty() && t.front() == '{';
}

}  // namespace detail

/// Parses a trace from text in either format.
inline RgbTrace parse_trace(std::string_view text, bool json,
                            std::optional<double> fps_override = std::nullopt) {
  auto raw = json ? detail::parse_trace_json(text) : detail::parse_trace_csv(text);
  const auto fps = fps_override ? fps_override : raw.fps;
  if (!fps) fail(ErrorKind::Validation, "frame rate unknown: no fps header and no override");
  return RgbTrace(std::move(raw.r), std::move(raw.g), std::move(raw.b), *fps, raw.t0);
}

/// Loads and validates a trace; it must span at least two windows.
inline RgbTrace load_trace(const std::filesystem::path& path,
                           std::optional<double> fps_override = std::nullopt,
                           double window_length = 10.0) {
  const auto text = detail::read_file(path);
  auto trace = parse_trace(text, detail::looks_like_json(path, text), fps_override);
  require_two_windows(trace, window_length);
  return trace;
}

inline std::string trace_to_csv(const RgbTrace& trace) {
  std::string out = "# fps=" + detail::format_double(trace.fps()) + "\n# t0=" +
                    detail::format_double(trace.t0()) + "\nr,g,b\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out += detail::format_double(trace.r()[k]);
    out += ',';
    out += detail::format_double(trace.g()[k]);
    out += ',';
    out += detail::format_double(trace.b()[k]);
    out += '\n';
  }
  return out;
}

inline std::string trace_to_json(const RgbTrace& trace) {
  nlohmann::json doc;
  doc["fps"] = trace.fps();
  doc["t0"] = trace.t0();
  auto rows = nlohmann::json::array();
  for (std::size_t k = 0; k < trace.size(); ++k) {
    rows.push_back({trace.r()[k], trace.g()[k], trace.b()[k]});
  }
  doc["rgb"] = std::move(rows);
  return doc.dump();
}

inline void write_trace(const RgbTrace& trace, const std::filesystem::path& path) {
  const bool json = detail::lower(path.extension().string()) == ".json";
  detail::write_file(path, json ? trace_to_json(trace) : trace_to_csv(trace));
}

inline GroundTruth parse_ground_truth(std::string_view text) {
  std::optional<GroundTruthKind> kind;
  std::vector<double> times, values;
  const auto lines = detail::lines_of(text);
  std::size_t row = 0;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto line = detail::trim(lines[ln]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = detail::split_commas(line);
    if (!kind) {
      if (fields.size() == 2 && detail::lower(fields[0]) == "t" && detail::lower(fields[1]) == "hr") {
        kind = GroundTruthKind::HrSeries;
      } else if (fields.size() == 2 && detail::lower(fields[0]) == "t" &&
                 detail::lower(fields[1]) == "ppg") {
        kind = GroundTruthKind::RawPpg;
      } else {
        fail(ErrorKind::Parse, "line " + std::to_string(ln + 1) + ": expected header t,hr or t,ppg");
      }
      continue;
    }
    const auto t = fields.size() == 2 ? detail::parse_double(fields[0]) : std::nullopt;
    const auto v = fields.size() == 2 ? detail::parse_double(fields[1]) : std::nullopt;
    if (!t || !v) {
      fail(ErrorKind::Parse, "row " + std::to_string(row) + " (line " + std::to_string(ln + 1) +
                                 "): expected two numbers");
    }
    times.push_back(*t);
    values.push_back(*v);
    ++row;
  }
  if (!kind) fail(ErrorKind::Parse, "missing t,hr / t,ppg header");
  return GroundTruth(*kind, std::move(times), std::move(values));
}

inline GroundTruth load_ground_truth(const std::filesystem::path& path) {
  return parse_ground_truth(detail::read_file(path));
}

inline std::string ground_truth_to_csv(const GroundTruth& gt) {
  std::string out = gt.kind() == GroundTruthKind::HrSeries ? "t,hr\n" : "t,ppg\n";
  for (std::size_t i = 0; i < gt.size(); ++i) {
    out += detail::format_double(gt.times()[i]);
    out += ',';
    out += detail::format_double(gt.values()[i]);
    out += '\n';
  }
  return out;
}

inline void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path) {
  detail::write_file(path, ground_truth_to_csv(gt));
}

}  // namespace prism

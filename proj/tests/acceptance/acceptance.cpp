// Acceptance runner. `acceptance` runs every criterion; `acceptance N` runs one.
// Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "oracles/dense_spline.hpp"
#include "prism/ablation.hpp"
#include "prism/prism.hpp"

using namespace prism;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct ScratchDir {
  fs::path path;
  ScratchDir() {
    path = fs::temp_directory_path() / ("prism_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

// Trace exports with both reference formats: an HR series and a raw PPG.
Outcome criterion_1() {
  ScratchDir dir;
  SynthSpec s;
  s.duration = 60.0;
  s.hr = HrTrajectory({{0.0, 64.0}, {30.0, 88.0}, {60.0, 76.0}});
  s.set_drift({{DriftComponent::Type::Exponential, 0.2, 15.0}});
  s.set_noise(0.002);
  s.seed = 21;
  const auto out = generate(s);
  write_trace(out.trace, dir / "subject.csv");
  write_ground_truth(out.truth, dir / "subject_hr.csv");
  std::string ppg = "t,ppg\n";
  for (int k = 0; k < 64 * 60; ++k) {
    const double t = k / 64.0;
    ppg += detail::format_double(t) + "," +
           detail::format_double(std::sin(2.0 * std::numbers::pi * s.hr.beats(t))) + "\n";
  }
  detail::write_file(dir / "subject_ppg.csv", ppg);

  std::ostringstream sink;
  cli::Overrides o;
  o.output = dir / "pred.json";
  if (cli::cmd_extract(dir / "subject.csv", o, {}, sink) != 0) return {false, "extract: " + sink.str()};
  std::string detail;
  for (const char* gt : {"subject_hr.csv", "subject_ppg.csv"}) {
    o.output = dir / "report.json";
    if (cli::cmd_eval(dir / "pred.json", dir / gt, o, sink) != 0) {
      return {false, std::string("eval against ") + gt + ": " + sink.str()};
    }
    const auto report = Json::parse(detail::read_file(dir / "report.json")).at("report");
    for (const char* key : {"mae", "rmse", "sd", "pearson_r", "acc", "n_windows", "per_window"}) {
      if (!report.contains(key) || report[key].is_null()) {
        return {false, std::string(gt) + " report lacks " + key};
      }
    }
    if (!fs::exists(dir / "report_windows.csv")) return {false, "per-window CSV missing"};
    detail += fmt("%s: MAE %.2f RMSE %.2f R %.3f Acc %.2f; ", gt, report["mae"].get<double>(),
                  report["rmse"].get<double>(), report["pearson_r"].get<double>(),
                  report["acc"].get<double>());
  }
  return {true, detail};
}

Outcome criterion_2() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> len(4, 64);
  std::uniform_real_distribution<double> u(-1.0, 1.0), rate(10.0, 60.0);
  const ParamGrid grid;
  double worst = 0.0, worst_linear = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = len(rng);
    const double fps = rate(rng);
    std::vector<double> t(n), y(n), line(n);
    const double a = 5.0 * u(rng), b = 3.0 * u(rng);
    for (int i = 0; i < n; ++i) {
      t[i] = i / fps;
      y[i] = 2.0 + std::sin(3.0 * t[i] + u(rng)) + 0.3 * u(rng);
      line[i] = a + b * t[i];
    }
    const auto k = oracle::curvature_matrix(t);
    for (double lam : grid.lambdas) {
      const auto fit = fit_smoothing_spline(y, t, {lam, {}});
      const auto ref = oracle::smoothing_spline(k, y, lam);
      worst = std::max(worst, max_abs_diff(fit.values, ref) / max_abs(ref));
      const auto lfit = fit_smoothing_spline(line, t, {lam, {}});
      worst_linear = std::max(worst_linear, max_abs_diff(lfit.values, line) / max_abs(line));
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-6 && worst_linear <= 1e-10 && elapsed < 10.0,
          fmt("max relative error %.2e (limit 1e-6), linear %.2e (limit 1e-10), %.2f s", worst,
              worst_linear, elapsed)};
}

Outcome criterion_3() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> len(64, 900);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> scale(1e-3, 5e-2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    NormalizedTrace n;
    n.fps = 30.0;
    const int size = len(rng);
    const double sr = scale(rng), sg = scale(rng), sb = scale(rng);
    for (int k = 0; k < size; ++k) {
      n.r_hat.push_back(1.0 + sr * noise(rng));
      n.g_hat.push_back(1.0 + sg * noise(rng));
      n.b_hat.push_back(1.0 + sb * noise(rng));
    }
    const auto pos = pos_project(n);
    const double gamma = *pos.provenance.gamma;
    const auto prism = prism_project(n, alpha_from_gamma(gamma));
    std::vector<double> scaled(prism.samples);
    for (double& v : scaled) v *= 1.0 + gamma;
    worst = std::max(worst, max_abs_diff(pos.samples, scaled) / max_abs(pos.samples));
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-10 && elapsed < 5.0,
          fmt("max relative error %.2e (limit 1e-10), %.2f s", worst, elapsed)};
}

Outcome criterion_4() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> x(300);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::sin(2.0 * std::numbers::pi * 1.2 * k / 30.0);
  const auto est = estimate_hr_window(x, 30.0, FrequencyBand{0.75, 4.0}, std::size_t{1} << 14);
  const double elapsed = seconds_since(start);
  return {std::abs(est.hr - 72.0) <= 0.11 && elapsed < 1.0,
          fmt("HR %.4f bpm, error %.4f (limit 0.11), %.3f s", est.hr, std::abs(est.hr - 72.0), elapsed)};
}

Outcome criterion_5() {
  SynthSpec s;
  s.duration = 60.0;
  s.hr = HrTrajectory::constant(72.0);
  s.pulse_amplitude = {0.003, 0.01, 0.002};
  s.set_drift({{DriftComponent::Type::Exponential, 0.3, 20.0},
               {DriftComponent::Type::Sinusoidal, 0.1, 45.0, 0.5}});
  s.set_noise(0.002);
  s.seed = 5;
  const auto out = generate(s);
  const auto start = std::chrono::steady_clock::now();
  const auto result = run_pipeline(out.trace, PipelineSettings{});
  const double elapsed = seconds_since(start);
  const auto truth = gt_to_hr_series(out.truth, plan_windows(out.trace, 10.0, 10.0), result.choice.band_used);
  const auto report = evaluate(result.hr, truth);
  return {report.mae <= 0.5 && report.acc_at == 1.0 && elapsed < 30.0,
          fmt("MAE %.3f bpm (limit 0.5), Acc@5 %.0f%%, lambda* %.2f alpha* %.2f, %.2f s", report.mae,
              100.0 * report.acc_at, result.choice.lambda_star, result.choice.alpha_star, elapsed)};
}

Outcome criterion_6() {
  SynthSpec s;
  s.duration = 60.0;
  s.hr = HrTrajectory::constant(66.0);
  s.harmonic_ratio = 3.0;
  s.set_noise(0.002);
  s.seed = 6;
  const auto result = run_pipeline(generate(s).trace, PipelineSettings{});
  double worst = 0.0;
  for (const auto& e : result.hr.estimates) worst = std::max(worst, std::abs(e.hr - 66.0));
  return {result.low_selected && worst <= 2.0,
          fmt("mean high-band %.2f bpm, mean low-band %.2f bpm, low band %s, max |HR - 66| %.2f",
              result.mean_high_bpm, result.mean_low_bpm, result.low_selected ? "selected" : "not selected",
              worst)};
}

std::vector<CorpusItem> adversarial_corpus() {
  using T = DriftComponent::Type;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double mixes[] = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 0.55, 0.65, 0.85, 0.95};
  std::vector<CorpusItem> corpus;
  for (int i = 0; i < 10; ++i) {
    SynthSpec s;
    s.duration = 60.0;
    s.seed = 100 + i;
    s.hr = HrTrajectory({{0.0, 60.0 + 30.0 * u(rng)}, {30.0, 60.0 + 30.0 * u(rng)},
                         {60.0, 60.0 + 30.0 * u(rng)}});
    // Chromatic flicker that the projection cancels only at this trace's mix.
    const double a = mixes[i];
    const double ar = 0.3 * (0.5 + u(rng));
    const double ab = 0.3 * (1.5 + u(rng));
    const double ag = a * ab + (1.0 - a) * ar;
    const double period = 0.2 * (0.8 + 0.4 * u(rng));
    const double phase = 2.0 * std::numbers::pi * u(rng);
    const double tau = 5.0 + 40.0 * u(rng);
    s.drift.r = {{T::Sinusoidal, ar, period, phase}, {T::Exponential, 0.3 * u(rng), tau}};
    s.drift.g = {{T::Sinusoidal, ag, period, phase}, {T::Exponential, 0.3 * u(rng), tau}};
    s.drift.b = {{T::Sinusoidal, ab, period, phase}, {T::Exponential, 0.3 * u(rng), tau}};
    s.set_noise(0.002);
    auto out = generate(s);
    corpus.push_back({"adv" + std::to_string(i), std::move(out.trace), std::move(out.truth)});
  }
  return corpus;
}

Outcome criterion_7() {
  const auto table = run_ablation(adversarial_corpus(), PipelineSettings{});
  for (const auto* row : table.rows()) {
    if (!row->pooled || row->failures() > 0) return {false, row->label + " had failing traces"};
  }
  const double full = table.full.pooled->mae;
  const double fixed = table.best_fixed_alpha.pooled->mae;
  const double tv = table.tv_only.pooled->mae;
  return {full <= fixed && fixed <= tv && tv >= 3.0 * full,
          fmt("MAE full %.3f <= best fixed alpha %.3f <= TV-only %.3f; TV-only / full = %.1f (limit 3)",
              full, fixed, tv, tv / full)};
}

Outcome criterion_8() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const BandPair bands;
  int failures = 0;
  std::string first;
  auto flag = [&](int trial, const std::string& what) {
    if (failures++ == 0) first = fmt("signal %d: ", trial) + what;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    PulseSignal s;
    s.fps = 15.0 + 45.0 * u(rng);
    const std::size_t n = static_cast<std::size_t>(s.fps * (20.0 + 40.0 * u(rng)));
    const int tones = static_cast<int>(4.0 * u(rng));
    std::vector<std::pair<double, double>> tone;
    for (int j = 0; j < tones; ++j) tone.emplace_back(0.2 + 6.0 * u(rng), u(rng));
    const double sigma = tones == 0 ? 1.0 : 0.5 * u(rng);
    for (std::size_t k = 0; k < n; ++k) {
      double v = sigma * noise(rng);
      for (const auto& [f, a] : tone) v += a * std::sin(2.0 * std::numbers::pi * f * k / s.fps);
      s.samples.push_back(v);
    }
    const auto plan = plan_windows(n, s.fps, 0.0, 10.0, 5.0 + 5.0 * u(rng));
    const auto& band = trial % 2 == 0 ? bands.high : bands.low;
    const double c = spectral_concentration(s, band);
    const auto hr = hr_series(s, plan, band);
    const double tv = temporal_variation(hr);
    if (!(c >= 0.0 && c <= 1.0)) flag(trial, fmt("C = %.17g", c));
    if (!(tv >= 0.0)) flag(trial, fmt("TV = %.17g", tv));

    PulseSignal scaled = s;
    const double factor = (u(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, -3.0 + 6.0 * u(rng));
    for (double& v : scaled.samples) v *= factor;
    const double c2 = spectral_concentration(scaled, band);
    const auto hr2 = hr_series(scaled, plan, band);
    if (std::abs(c2 - c) > 1e-12) flag(trial, fmt("C changed by %.2e under scaling", c2 - c));
    for (std::size_t w = 0; w < hr.size(); ++w) {
      if (hr.estimates[w].hr != hr2.estimates[w].hr) flag(trial, fmt("window %zu HR changed under scaling", w));
    }
    if (std::abs(temporal_variation(hr2) - tv) > 1e-12 * std::max(1.0, tv)) {
      flag(trial, "TV changed under scaling");
    }

    const double k1 = 3.0 * u(rng), k2 = 3.0 * u(rng), mix = u(rng);
    const double o1 = objective(s, plan, band, k1).objective;
    const double o2 = objective(s, plan, band, k2).objective;
    const double om = objective(s, plan, band, mix * k1 + (1.0 - mix) * k2).objective;
    const double tol = 1e-12 * (1.0 + std::abs(o1) + std::abs(o2));
    if (std::abs(om - (mix * o1 + (1.0 - mix) * o2)) > tol) flag(trial, "objective not affine in k");
    if (std::abs(o1 - (k1 * tv - c)) > tol) flag(trial, "objective differs from k TV - C");
  }
  return {failures == 0, failures == 0 ? "1000 signals, 0 failures"
                                       : fmt("%d failures; first: ", failures) + first};
}

Outcome criterion_9() {
  SynthSpec s;
  s.duration = 160.0;
  s.hr = HrTrajectory::constant(75.0);
  s.set_drift({{DriftComponent::Type::Sinusoidal, 0.05, 80.0}});
  s.set_noise(0.002);
  s.seed = 9;
  const auto trace = generate(s).trace;
  const PipelineSettings settings;
  std::vector<RefreshRecord> refreshes;
  const auto estimates = run_online(trace, settings, OnlineSettings{}, &refreshes);
  if (refreshes.size() < 4) return {false, fmt("only %zu refreshes", refreshes.size())};
  std::string detail;
  bool pass = true;
  const auto& first = refreshes.front();
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& r = refreshes[i];
    if (!r.ok) return {false, fmt("refresh %zu failed: ", i) + r.error};
    const auto lo = static_cast<std::size_t>(std::llround((r.buffer_start - trace.t0()) * trace.fps()));
    const auto hi = static_cast<std::size_t>(std::llround((r.time - trace.t0()) * trace.fps()));
    const auto offline = run_pipeline(trace.slice(lo, hi), settings);
    const auto& on = r.result->choice;
    const bool same = on.lambda_star == offline.choice.lambda_star &&
                      on.alpha_star == offline.choice.alpha_star &&
                      on.score.objective == offline.choice.score.objective &&
                      on.band_used.f_min == offline.choice.band_used.f_min &&
                      on.band_used.f_max == offline.choice.band_used.f_max;
    const bool stable = on.lambda_star == first.result->choice.lambda_star &&
                        on.alpha_star == first.result->choice.alpha_star;
    pass = pass && same && stable;
    detail += fmt("t=%.0f s (%.0f-%.0f): (%.2f, %.2f)%s%s; ", r.time, r.buffer_start, r.time,
                  on.lambda_star, on.alpha_star, same ? "" : " differs from offline",
                  stable ? "" : " unstable");
  }
  for (const auto& e : estimates) {
    if (e.time > first.time && (e.lambda != first.result->choice.lambda_star ||
                                e.alpha != first.result->choice.alpha_star)) {
      pass = false;
      detail += fmt("window at %.0f s used other parameters; ", e.time);
    }
  }
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion_1, criterion_2, criterion_3,
                                                       criterion_4, criterion_5, criterion_6,
                                                       criterion_7, criterion_8, criterion_9};
  std::vector<int> selected;
  if (argc > 1) {
    for (int i = 1; i < argc; ++i) {
      const int n = std::atoi(argv[i]);
      if (n < 1 || n > static_cast<int>(criteria.size())) {
        std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
        return 2;
      }
      selected.push_back(n);
    }
  } else {
    for (int n = 1; n <= static_cast<int>(criteria.size()); ++n) selected.push_back(n);
  }
  int failed = 0;
  for (int n : selected) {
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", n, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using prism::cli::Overrides;

void add_pipeline_flags(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config_path, "JSON config file");
  cmd.add_option("--fps", o.fps, "frame rate, overrides the trace header");
  cmd.add_option("--window", o.window, "window length in seconds");
  cmd.add_option("--hop", o.hop, "hop in seconds");
  cmd.add_option("--nfft", o.nfft, "FFT length (power of two)");
  cmd.add_option("--k", o.k, "TV weight in the objective");
  cmd.add_option("--alpha-grid", o.alpha_grid, "alpha candidates")->delimiter(',');
  cmd.add_option("--lambda-grid", o.lambda_grid, "lambda candidates")->delimiter(',');
  cmd.add_option("--mode", o.mode,
                 "full | fixed_alpha:<a> | fixed_lambda:<l> | concentration_only | tv_only");
  cmd.add_option("--band-high", o.band_high, "high band f_min,f_max in Hz")->delimiter(',');
  cmd.add_option("--band-low", o.band_low, "low band f_min,f_max in Hz")->delimiter(',');
  cmd.add_option("--harmonic-tol", o.harmonic_tol, "relative harmonic tolerance");
  cmd.add_option("--aggregation", o.aggregation, "per_window | per_trace");
  cmd.add_option("--taper", o.taper, "rectangular | hann");
  cmd.add_option("--threshold", o.threshold, "accuracy threshold in bpm");
  cmd.add_option("--output", o.output, "output path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive rPPG heart-rate extraction"};
  app.require_subcommand(1);

  Overrides o;
  std::string trace_path, pred_path, gt_path, dir, spec_path;
  prism::cli::ExtractOptions extract_opts;
  std::string baseline_path;
  bool serial = false;
  bool json_trace = false;

  auto* extract = app.add_subcommand("extract", "estimate HR from an RGB trace");
  extract->add_option("trace", trace_path, "trace CSV or JSON")->required();
  extract->add_option("--dump-baselines", baseline_path, "write fitted channel baselines as CSV");
  extract->add_flag("--online", extract_opts.online, "replay the trace through the streaming estimator");
  add_pipeline_flags(*extract, o);

  auto* eval = app.add_subcommand("eval", "score predictions against a reference");
  eval->add_option("pred", pred_path, "extract JSON or t,hr CSV")->required();
  eval->add_option("gt", gt_path, "t,hr or t,ppg CSV")->required();
  add_pipeline_flags(*eval, o);

  auto* ablate = app.add_subcommand("ablate", "run every search variant over a directory of traces");
  ablate->add_option("dir", dir, "directory of <name>.trace.csv + <name>.gt.csv")->required();
  ablate->add_flag("--serial", serial, "process traces one at a time");
  add_pipeline_flags(*ablate, o);

  auto* synth = app.add_subcommand("synth", "generate a synthetic trace and reference");
  synth->add_option("spec", spec_path, "synthetic spec JSON")->required();
  synth->add_option("--seed", o.seed, "override the spec seed");
  synth->add_option("--fps", o.fps, "override the spec frame rate");
  synth->add_option("--output", o.output, "output prefix")->required();
  synth->add_flag("--json", json_trace, "write the trace as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return prism::cli::report_error(std::cout, "E_USAGE", prism::cli::Exit::Usage, e.what());
  }

  if (!baseline_path.empty()) extract_opts.baseline_dump = baseline_path;
  if (*extract) return prism::cli::cmd_extract(trace_path, o, extract_opts);
  if (*eval) return prism::cli::cmd_eval(pred_path, gt_path, o);
  if (*ablate) return prism::cli::cmd_ablate(dir, o, !serial);
  return prism::cli::cmd_synth(spec_path, o, json_trace);
}

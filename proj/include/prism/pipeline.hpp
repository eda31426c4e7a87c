#pragma once

#include <cmath>
#include <cstddef>

#include "prism/optimizer.hpp"
#include "prism/spectral.hpp"
#include "prism/trace.hpp"

namespace prism {

/// Everything the offline pipeline needs besides the trace itself.
struct PipelineSettings {
  double window_length = 10.0;  // s
  double hop = 10.0;            // s
  std::size_t n_fft = kDefaultFftBins;
  double k = 1.0 / 3.0;
  ParamGrid grid;
  BandPair bands;
  AblationMode mode;
  Taper taper = Taper::Rectangular;
  bool parallel = false;

  SearchOptions search() const { return {n_fft, taper, parallel}; }

  void validate() const {
    if (!(window_length > 0.0) || !(hop > 0.0)) {
      fail(ErrorKind::InvalidArgument, "window length and hop must be > 0");
    }
    if (!is_power_of_two(n_fft)) fail(ErrorKind::InvalidArgument, "n_fft must be a power of two");
    if (!std::isfinite(k)) fail(ErrorKind::InvalidArgument, "k must be finite");
    grid.validate();
    bands.validate();
    mode.validate();
  }
};

/// Offline extraction: parameters chosen once for the whole trace.
inline DualBandResult run_pipeline(const RgbTrace& trace, const PipelineSettings& s) {
  s.validate();
  require_two_windows(trace, s.window_length);
  const auto plan = plan_windows(trace, s.window_length, s.hop);
  return dual_band_select(trace, s.grid, s.bands, plan, s.mode, s.k, s.search());
}

}  // namespace prism

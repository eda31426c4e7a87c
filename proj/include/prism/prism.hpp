#pragma once

#include "prism/detrend.hpp"
#include "prism/error.hpp"
#include "prism/fft.hpp"
#include "prism/ground_truth.hpp"
#include "prism/io.hpp"
#include "prism/metrics.hpp"
#include "prism/online.hpp"
#include "prism/optimizer.hpp"
#include "prism/pipeline.hpp"
#include "prism/projection.hpp"
#include "prism/serialization.hpp"
#include "prism/smoothing_spline.hpp"
#include "prism/spectral.hpp"
#include "prism/synth.hpp"
#include "prism/trace.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "prism/prism.hpp"

using namespace prism;
using Catch::Matchers::WithinAbs;

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("generated samples follow the closed form") {
  SynthSpec s;
  s.duration = 12.0;
  s.hr = HrTrajectory::linear(60.0, 84.0, 12.0);
  s.set_drift({{DriftComponent::Type::Sinusoidal, 0.05, 20.0, 0.3}});
  s.harmonic_ratio = 0.5;
  const auto out = generate(s);
  for (std::size_t k = 0; k < out.trace.size(); k += 7) {
    const double t = k / 30.0;
    // 60 -> 84 bpm over 12 s: beats = t + 0.0166... t^2
    const double phi = 2.0 * std::numbers::pi * (t + 0.5 * (24.0 / 60.0 / 12.0) * t * t);
    const double d = 1.0 + 0.05 * std::sin(2.0 * std::numbers::pi * t / 20.0 + 0.3);
    const double g = 100.0 * d * (1.0 + 0.01 * (std::sin(phi) + 0.5 * std::sin(2.0 * phi)));
    CHECK_THAT(out.trace.g()[k], WithinAbs(g, 1e-9));
  }
}

TEST_CASE("same seed, same trace; different seed, different noise") {
  SynthSpec s;
  s.set_noise(0.01);
  s.seed = 99;
  const auto a = generate(s);
  const auto b = generate(s);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    CHECK(a.trace.r()[k] == b.trace.r()[k]);
    CHECK(a.trace.g()[k] == b.trace.g()[k]);
    CHECK(a.trace.b()[k] == b.trace.b()[k]);
  }
  s.seed = 100;
  const auto c = generate(s);
  CHECK(c.trace.g()[10] != a.trace.g()[10]);
}

TEST_CASE("reference HR equals the trajectory at window midpoints") {
  SynthSpec s;
  s.duration = 60.0;
  s.t0 = 3.0;
  s.hr = HrTrajectory({{0.0, 60.0}, {30.0, 90.0}, {60.0, 75.0}});
  const auto out = generate(s);
  REQUIRE(out.truth.size() == 6);
  for (std::size_t i = 0; i < out.truth.size(); ++i) {
    const double t = out.truth.times()[i];
    CHECK(t == 3.0 + 5.0 + 10.0 * i);
    CHECK(out.truth.values()[i] == s.hr.bpm_at(t - 3.0));
  }
}

TEST_CASE("null signal collapses to ZeroPower downstream") {
  SynthSpec s;
  s.duration = 30.0;
  s.pulse_amplitude = {0.0, 0.0, 0.0};
  const auto out = generate(s);
  for (std::size_t k = 0; k < out.trace.size(); ++k) CHECK(out.trace.g()[k] == 100.0);
  const auto sig = prism_project(normalize_trace(out.trace, {0.1, {}}), 0.8);
  try {
    spectral_concentration(sig, FrequencyBand{});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroPower);
  }
}

TEST_CASE("clean 72 bpm trace is recovered in every window") {
  SynthSpec s;
  s.duration = 60.0;
  const auto r = run_pipeline(generate(s).trace, PipelineSettings{});
  REQUIRE(r.hr.size() == 6);
  for (const auto& e : r.hr.estimates) CHECK_THAT(e.hr, WithinAbs(72.0, 0.2));
}

TEST_CASE("66 bpm with a strong harmonic peaks at 132 bpm in the high band") {
  SynthSpec s;
  s.hr = HrTrajectory::constant(66.0);
  s.harmonic_ratio = 3.0;
  s.set_noise(0.002);
  const auto trace = generate(s).trace;
  const auto plan = plan_windows(trace, 10.0, 10.0);
  const auto sig = prism_project(normalize_trace(trace, {0.1, {}}), 0.8);
  const auto hr = hr_series(sig, plan, BandPair{}.high);
  for (const auto& e : hr.estimates) CHECK_THAT(e.hr, WithinAbs(132.0, 1.0));
}

TEST_CASE("drift is separable from the pulse at every grid lambda") {
  for (double tau : {10.0, 30.0}) {
    SynthSpec s;
    s.duration = 60.0;
    s.set_drift({{DriftComponent::Type::Exponential, 0.4, tau},
                 {DriftComponent::Type::Sinusoidal, 0.1, 4.0 * tau}});
    const auto out = generate(s);
    std::vector<double> pulse(out.trace.size());
    for (std::size_t k = 0; k < pulse.size(); ++k) {
      pulse[k] = std::sin(2.0 * std::numbers::pi * s.hr.beats(k / s.fps));
    }
    for (double lam : {0.01, 0.05, 0.1, 0.5, 1.0}) {
      const auto n = normalize_trace(out.trace, {lam, {}});
      CHECK(correlation(n.g_hat, pulse) >= 0.9);
    }
  }
}

TEST_CASE("additive drift keeps channels positive") {
  SynthSpec s;
  s.additive_drift = true;
  s.set_drift({{DriftComponent::Type::RegimeSwitch, 0.5, 1.0, 0.0, 30.0}});
  const auto out = generate(s);
  for (std::size_t k = 0; k < out.trace.size(); ++k) CHECK(out.trace.r()[k] > 0.0);
  CHECK(out.trace.g().back() > out.trace.g().front() * 1.3);
}

TEST_CASE("spec validation") {
  SynthSpec s;
  s.hr = HrTrajectory::constant(300.0);
  CHECK_THROWS_AS(generate(s), Error);
  s = SynthSpec{};
  s.set_noise(-1.0);
  CHECK_THROWS_AS(s.validate(), Error);
  s = SynthSpec{};
  s.set_drift({{DriftComponent::Type::Exponential, -2.0, 5.0}});
  try {
    generate(s);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Spec);
  }
}

TEST_CASE("spec JSON round-trips") {
  const auto j = Json::parse(R"({
    "duration": 45, "fps": 25,
    "hr": {"type": "linear", "start_bpm": 60, "end_bpm": 80},
    "drift": {"r": [{"type": "sinusoidal", "amplitude": 0.1, "period": 30}],
              "g": [{"type": "exponential", "amplitude": 0.2, "timescale": 15}],
              "b": [{"type": "regime_switch", "amplitude": 0.3, "at": 20, "width": 2}]},
    "noise_sigma": {"r": 0.001, "g": 0.002, "b": 0.003},
    "harmonic_ratio": 0.5, "seed": 17})");
  const auto spec = synth_spec_from_json(j);
  CHECK(spec.fps == 25.0);
  CHECK(spec.hr.bpm_at(45.0) == 80.0);
  CHECK(spec.noise_sigma.b == 0.003);
  const auto again = synth_spec_from_json(to_json(spec));
  const auto a = generate(spec), b = generate(again);
  for (std::size_t k = 0; k < a.trace.size(); ++k) CHECK(a.trace.b()[k] == b.trace.b()[k]);
  CHECK_THROWS_AS(synth_spec_from_json(Json::parse(R"({"hr": {"type": "wave"}})")), Error);
}

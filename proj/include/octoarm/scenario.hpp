#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "octoarm/cable.hpp"
#include "octoarm/controller.hpp"
#include "octoarm/environment.hpp"
#include "octoarm/muscles.hpp"
#include "octoarm/rod.hpp"
#include "octoarm/sensing.hpp"

namespace octoarm {

// Rest-shape experiment sweep: a grid of top-cable clamp pairs against a
// fixed bottom cable, plus a recurrence-gain sweep at one clamp pair.
struct RestGrid {
  std::vector<double> top_v0{30.0, 40.0, 50.0, 60.0};
  std::vector<double> top_vl{60.0, 80.0, 100.0, 120.0};
  double bottom_v0 = 40.0;
  double bottom_vl = 0.0;
  std::vector<double> b_sweep{0.0, 0.5, 1.0, 1.5, 2.0};
  double sweep_top_v0 = 40.0;
  double sweep_top_vl = 80.0;
};

// Pursuit oracle setup, everything in arm lengths and seconds.
struct McSetup {
  double range0 = 0.8;
  double bearing0 = 0.6;
  double speed = 1.0;
  double dt = 1.0e-5;
  double duration = 2.0;
  double capture = 0.05;
};

// Estimate-statistics grid; nx = 0 leaves the extent to the per-arm default
// (straight: 11x11 on [0,1]^2, bent: 16x11 on [-0.5,1]x[0,1], arm lengths).
struct StatsGrid {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
};

struct Scenario {
  std::string kind = "reach";  // rest_shape | reach | sense | sensorimotor | stats | mc_oracle
  std::string reach_case = "I";       // I | II | III
  std::string arm = "straight";       // straight | bent (sense / stats start shape)
  std::string mu_mode = "free";       // free | pinned source-intensity estimates
  std::string assumptions = "free";   // free | thm2 (start consensus at its fixed point)
  std::string estimator = "direct";   // direct | rings
  std::string rod_mode = "constrained";  // constrained | extensible
  bool have_target = false;
  double target_x = 0.0;  // arm lengths
  double target_y = 0.0;
  std::uint64_t seed = 1;
  double duration = 0.0;  // seconds; 0 picks the per-kind default
  double dt = 1.0e-5;
  int sense_stride = 1;
  int log_stride = 1000;
  bool noise = false;
  double noise_level = 0.05;
  std::string out_dir;  // empty: no files written

  RodParameters rod;
  MuscleParams muscle;
  CableParams cable;
  EnvironmentParams env;
  ControlParams control;
  SensingParams sense;

  RestGrid rest;
  McSetup mc;
  StatsGrid stats;
};

// Defaults for a run kind (also the base the parser fills into).
Scenario scenario_defaults(const std::string& kind);

// Parse sectioned key = value text over s.  Unknown sections or keys, bad
// values, and duplicate keys raise ConfigError naming the line.
void parse_scenario_text(Scenario& s, const std::string& text);

// Apply one "section.key=value" assignment (the CLI override form).
void apply_override(Scenario& s, const std::string& assignment);

// Kind-dependent coupling and required-field checks: the reach case pins the
// rod mode and transverse gating, reach/sense/sensorimotor kinds demand a
// target, numeric ranges are validated.  Throws ConfigError.
void finalize_scenario(Scenario& s);

// Canonical text form; parsing it back reproduces the scenario exactly.
std::string serialize_scenario(const Scenario& s);

// FNV-1a hash of the canonical text, recorded in run reports.
std::uint64_t scenario_hash(const Scenario& s);

RodMode scenario_rod_mode(const Scenario& s);

}  // namespace octoarm

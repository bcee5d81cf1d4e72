#pragma once

#include <string>
#include <utility>
#include <vector>

#include "octoarm/scenario.hpp"
#include "octoarm/sensorimotor.hpp"

namespace octoarm {

struct RunReport {
  std::string kind;
  std::uint64_t hash = 0;
  bool ok = true;  // verdict of the run's own acceptance checks
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> notes;
  std::vector<std::string> files;

  void metric(const std::string& name, double value) { metrics.emplace_back(name, value); }
};

// One rest-shape grid cell: clamp pair, recurrence gain, and the balanced
// configuration.
struct RestShapeCell {
  double top_v0 = 0.0, top_vl = 0.0, bottom_v0 = 0.0, bottom_vl = 0.0, gain_b = 1.0;
  Deformations def;
  double theta_tip = 0.0;    // tangent angle at the tip [rad]
  double kappa_base = 0.0;   // curvature at the first interior node
  double kappa_tip = 0.0;    // curvature at the last interior node
};

// The clamp-pair grid followed by the gain sweep; verdict checks the
// monotone trends (base clamp moves base curvature, tip clamp moves tip
// curvature, larger recurrence gain straightens the arm, equal clamps give a
// straight arm).
std::vector<RestShapeCell> run_rest_shape(const Scenario& s, RunReport* rep);

// Canonical hooked test shape for static-arm sensing: smooth curvature
// profile kappa(s) = (2 + cos(pi s/L))/L, total turning angle 2 rad.
Deformations bent_arm_shape(const Scenario& s);

// Static-arm estimator run against one target (arm lengths).  Consensus
// starts from the seeded draw, inputs are read from the frozen shape each
// estimator step (noisy when the scenario says so).
struct SenseRunResult {
  double e_r = 0.0;  // mean estimate error at the end, arm lengths
  double e_prop = 0.0;
  double e_chemo = 0.0;
  ConsensusState est;
  std::vector<Vec2> unit_pos;  // arm lengths
  bool failed = false;
  std::string message;
};
SenseRunResult run_sense_once(const Scenario& s, const Deformations& shape,
                              Vec2 target, std::uint64_t seed, CsvWriter* log);

// Estimator statistics over the target grid; per-target seeds derive from the
// scenario seed, runs that throw are excluded and counted.
struct StatsSummary {
  int n = 0;
  int failed = 0;
  double mean = 0.0, min_e = 0.0, max_e = 0.0;
  std::vector<double> errors;
};
StatsSummary run_stats(const Scenario& s, RunReport* rep);

LoopResult run_reach_scenario(const Scenario& s, RunReport* rep);
LoopResult run_sensorimotor_scenario(const Scenario& s, RunReport* rep);

struct McCompare {
  PursuitTrajectory oracle;
  BearingFlow flow;
  double max_gap = 0.0;  // L-inf over the common pre-capture samples
};
McCompare run_mc_scenario(const Scenario& s, RunReport* rep);

// Dispatch on s.kind; writes CSVs and a run report when out_dir is set.
RunReport run_scenario(const Scenario& s);

}  // namespace octoarm

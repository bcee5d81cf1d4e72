#pragma once

#include <cstdint>
#include <vector>

#include "octoarm/cable.hpp"
#include "octoarm/controller.hpp"
#include "octoarm/csv.hpp"
#include "octoarm/muscles.hpp"
#include "octoarm/rod.hpp"
#include "octoarm/sensing.hpp"

namespace octoarm {

// Piecewise-linear value of per-unit samples at arc position s, clamped
// beyond the first and last unit; su must be increasing.
double interp_units(const std::vector<double>& vals, const std::vector<double>& su, double s);

// Fields the controller consumes, rebuilt from the estimates and the cached
// sensory inputs: bearing at the element midpoints, believed distance
// e^{-mu c} at the nodes (arm lengths), and the distance minimum.
struct EstimateFields {
  std::vector<double> alpha_mid;  // n entries
  std::vector<double> rho_node;   // n+1 entries
  int closest_node = 0;
  double s_hat = 0.0;  // arc length of the believed closest point [m]
};
EstimateFields interpolate_estimates(const ConsensusState& est, const ArmSenseInputs& in,
                                     const SensingParams& sp, const RodParameters& rp);

// Certainty equivalence: the estimated fields drive the exact stimulus map of
// the ground-truth controller.
ControlInputs certainty_equivalence_currents(const EstimateFields& f, const RodParameters& rp,
                                             const ControlParams& cp, bool enable_trans);

struct ArmStart {
  RodState rod;
  CableState top, bottom, trans;
  Activations u0;
};

// Arm at rest: cables hold the resting clamp profiles (transverse at zero),
// the rod sits in the shape that balances the resulting activations.
ArmStart make_rest_arm(const RodParameters& rp, const MuscleParams& mp, const CableParams& cp,
                       double v_top0, double v_topL, double v_bot0, double v_botL,
                       RodMode mode);

struct LoopParams {
  double dt = 1.0e-5;
  double t_final = 2.0;
  int sense_stride = 1;      // estimator updates every k-th rod step
  double noise_level = 0.0;  // relative sensory noise, fresh draw per reading
  RodMode mode = RodMode::constrained;
  bool enable_trans = false;
  int log_stride = 1000;
};

struct LoopSample {
  double t = 0.0;
  double rho_true = 0.0;  // distance at the true closest point [m]
  double s_bar = 0.0;     // true closest arc length [m]
  double e_r = 0.0;       // mean target-estimate error, arm lengths
  double e_prop = 0.0;
  double e_chemo = 0.0;
  double tip_cos_alpha = 0.0;
};

struct LoopResult {
  bool reached = false;   // the run ends inside the eps ball
  double t_reach = -1.0;  // start of the terminal inside-eps stretch
  bool held = true;       // never left the ball after first touching it
  double final_rho = 0.0; // [m]
  double final_e_r = 0.0;
  double final_tip_cos_alpha = 0.0;
  std::vector<LoopSample> samples;
  RodState state;
  ConsensusState estimates;
};

// Ground-truth loop: bearing and closest point measured from the realized
// state each step, no estimator in between.
LoopResult run_truth_reach(const RodParameters& rp, const MuscleParams& mp,
                           const CableParams& cp, const ControlParams& ctrl,
                           const ArmStart& start, Vec2 target, const LoopParams& lp,
                           CsvWriter* log = nullptr);

// Full loop, in order per step: sensors and estimator, field interpolation,
// stimuli, cable dynamics, activations, rod dynamics.
LoopResult run_sensorimotor(const RodParameters& rp, const MuscleParams& mp,
                            const CableParams& cp, const ControlParams& ctrl,
                            const SensingParams& sp, const SensorArrayOptions& so,
                            const ArmStart& start, Vec2 target, const LoopParams& lp,
                            std::uint64_t seed, CsvWriter* log = nullptr);

}  // namespace octoarm

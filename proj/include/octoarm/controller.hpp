#pragma once

#include <vector>

#include "octoarm/cable.hpp"
#include "octoarm/core.hpp"
#include "octoarm/muscles.hpp"
#include "octoarm/rod.hpp"

namespace octoarm {

struct ControlParams {
  double chi = 200.0;      // bearing feedback gain, enters as a current [mV]
  double eps_frac = 0.05;  // reach tolerance as a fraction of arm length
  void validate() const;
};

// Index of the sampled minimum; ties break toward the smallest index.
int closest_point_index(const std::vector<double>& rho);

// Distance and bearing to the target along the arm.  rho and alpha live on
// the node grid (n+1 entries); alpha is a continuous lift when produced by
// integration and a wrapped angle when measured pointwise.
struct PolarField {
  std::vector<double> rho;
  std::vector<double> alpha;
  bool degenerate = false;  // rho passed through zero, bearing undefined there
};

// Integrate the target kinematics from the base,
//   rho_s   = -(nu1 cos a + nu2 sin a)
//   alpha_s = -kappa + (nu1 sin a - nu2 cos a) / rho
// with midpoint RK2 on the node grid.  Deformations between nodes come from
// linear interpolation of the interior-node curvature (clamped at the ends)
// and per-element stretch/shear.  rho(0) = |target|, alpha(0) relative to the
// base tangent angle theta0.
PolarField integrate_target_kinematics(const Deformations& d, const RodParameters& p,
                                       Vec2 target, double theta0 = 0.0);

// The same field read directly off a realized state: rho_i = |target - r_i|,
// alpha_i = atan2(target - r_i) - theta(s_i), wrapped.  Node angles average
// the adjacent element angles through unit tangents.
PolarField measure_target_polar(const RodState& s, const RodParameters& p, Vec2 target);

// Bearing at the element midpoints of a realized state, for the stimulus map.
std::vector<double> measure_midpoint_bearing(const RodState& s, Vec2 target);

// Stimulus currents per element.  alpha is the bearing at the element
// midpoint, s_mid the midpoint arc length; stations beyond s_bar are passive.
// The two longitudinal channels split the sign of sin(alpha); the transverse
// channel carries chi cos^2(alpha) and is gated off when enable_trans is
// false (the inextensible rod cannot use it).
struct ControlInputs {
  std::vector<double> top, bottom, trans;
};
ControlInputs muscle_currents(const std::vector<double>& alpha,
                              const std::vector<double>& s_mid, double s_bar,
                              const ControlParams& cp, bool enable_trans);

struct EquilibriumOptions {
  RodMode mode = RodMode::constrained;
  bool enable_trans = false;
  double relax = 0.1;     // damping of the deformation update
  double tol = 1e-8;      // max |deformation update| stopping threshold
  int max_iters = 10000;
};

struct EquilibriumResult {
  Deformations def;
  PolarField polar;        // target kinematics at the solution
  ControlInputs currents;  // stimuli at the solution
  Activations u;           // cable-filtered activations at the solution
  double s_bar = 0.0;
  double residual = 0.0;   // L-inf force balance residual, absolute
  double residual_rel = 0.0;  // residual over the largest active stress
  int iters = 0;
  bool converged = false;
};

// Reaching equilibrium: alternate (a) target kinematics on the current shape,
// (b) stimuli from the bearing, (c) static cable response, (d) deformations
// balancing the filtered activations, with damped updates until the largest
// deformation change falls below tol.
EquilibriumResult solve_reach_equilibrium(const RodParameters& rp, const MuscleParams& mp,
                                          const CableParams& cp, const ControlParams& ctrl,
                                          Vec2 target, const EquilibriumOptions& opt);

// Planar pursuit oracle: a unit with speed v and heading rate
// omega = chi sin(phi) closing on a fixed target, integrated with forward
// Euler in time.  zeta is the range, phi the bearing.  Terminates at capture
// (zeta <= capture_radius) or t_final.
struct PursuitTrajectory {
  std::vector<double> zeta;
  std::vector<double> phi;
  double dt = 0.0;
  bool captured = false;
  double t_end = 0.0;
};
PursuitTrajectory mc_unicycle_oracle(Vec2 start, double heading, Vec2 target,
                                     double speed, double chi, double dt,
                                     double t_final, double capture_radius);

// Arc-length twin of the oracle at unit speed: forward Euler of
//   rho'   = -cos(alpha)
//   alpha' = -chi sin(alpha) + sin(alpha) / rho
// used to compare the arm-frame bearing flow against the pursuit recursion.
struct BearingFlow {
  std::vector<double> rho;
  std::vector<double> alpha;
  double ds = 0.0;
  bool captured = false;
  double s_end = 0.0;
};
BearingFlow integrate_bearing_flow(double rho0, double alpha0, double chi,
                                   double ds, double s_final, double capture_radius);

}  // namespace octoarm

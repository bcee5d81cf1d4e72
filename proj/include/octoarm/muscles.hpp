#pragma once

#include <vector>

#include "octoarm/core.hpp"
#include "octoarm/rod.hpp"

namespace octoarm {

// Internal musculature: an antagonistic pair of longitudinal muscles offset
// above and below the axis, plus a transverse group that extends the arm by
// squeezing the cross-section.  Muscle tension follows a cubic force-length
// curve around the natural length 1; activation scales it linearly.

struct MuscleParams {
  double sigma_lm = 1.0e4;      // peak stress of each longitudinal muscle [Pa]
  double sigma_tm = 2.5e4;      // peak stress of the transverse muscle [Pa]
  double area_frac_lm = 0.125;  // cross-section fraction per longitudinal muscle
  double area_frac_tm = 0.25;   // cross-section fraction of the transverse muscle
  double offset_factor = 0.625; // lever arm of the longitudinal pair, x local radius
  bool tm_reciprocal = false;   // transverse stretch 1/nu1 instead of 2 - nu1

  void validate() const;
};

struct Activations {
  std::vector<double> top;    // per element, in [0,1]
  std::vector<double> bottom;
  std::vector<double> trans;

  static Activations zero(int n);
};

// max(3.06 l^3 - 13.64 l^2 + 18.01 l - 6.44, 0); ~0.99 at l = 1, zero
// outside a window around the natural length.
double force_length(double l);

// Antiderivative of force_length with value 0 at l = 1; continuous across
// the clamped regions so that force and potential stay consistent.
double force_length_antiderivative(double l);

// Muscle stretches per element.  Longitudinal lengths use the curvature
// averaged to the element midpoint; the transverse length depends on the
// axial stretch only.
struct MuscleLengths {
  std::vector<double> top, bottom, trans;
};
MuscleLengths muscle_lengths(const Deformations& d, const RodParameters& rp,
                             const MuscleParams& mp);

// Tension magnitude per element and group: u * sigma * (area fraction) * A * f(l).
struct MuscleTensions {
  std::vector<double> top, bottom, trans;
};
MuscleTensions muscle_tensions(const Deformations& d, const RodParameters& rp,
                               const MuscleParams& mp, const Activations& u);

// Generalized muscle loads.  `axial` adds to the tangential stress of each
// element; `couple_node` is the muscle bending couple carried to the interior
// nodes with the same stencil that averages curvature to the midpoints, which
// keeps the discrete loads an exact gradient of muscle_potential.
struct ActiveLoads {
  std::vector<double> axial;        // n
  std::vector<double> couple_elem;  // n
  std::vector<double> couple_node;  // n+1, entry n identically 0
};
ActiveLoads muscle_loads(const Deformations& d, const RodParameters& rp,
                         const MuscleParams& mp, const Activations& u);

// Work stored in the musculature at frozen activation, zero at rest.
double muscle_potential(const Deformations& d, const RodParameters& rp,
                        const MuscleParams& mp, const Activations& u);

// Kinetic + passive elastic + muscle potential.
double total_energy(const RodState& s, const RodParameters& rp,
                    const MuscleParams& mp, const Activations& u, RodMode mode);

struct StepOptions {
  RodMode mode = RodMode::constrained;
  double dt = 1.0e-5;
  bool drag = true;
};

// One position-Verlet step: half drift, velocity kick with loads evaluated at
// the midpoint configuration, half drift.  The constrained mode projects the
// edge lengths and slaves the angles after each drift.
void step_arm(RodState& s, const RodParameters& rp, const MuscleParams& mp,
              const Activations& u, const StepOptions& opt);

// Deformations at which the passive stresses balance the loads of a frozen
// activation pattern: EI kappa = -m_node at the interior nodes and, in the
// extensible mode, EA (nu1 - 1) = -axial per element (nu2 stays 0).  The
// muscle loads depend on the deformations through the force-length factor, so
// the balance is found by damped fixed-point iteration.  Throws NumericsError
// when the update has not contracted below `tol` after `max_iters` sweeps.
Deformations solve_static_deformations(const RodParameters& rp, const MuscleParams& mp,
                                       const Activations& u, RodMode mode,
                                       double relax = 0.1, double tol = 1e-10,
                                       int max_iters = 20000);

}  // namespace octoarm

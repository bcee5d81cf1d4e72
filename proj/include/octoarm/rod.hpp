#pragma once

#include <vector>

#include "octoarm/core.hpp"

namespace octoarm {

// Planar elastic rod on a staggered grid.
//
//   nodes    0 .. n      carry position and velocity
//   elements 0 .. n-1    carry angle theta and angular velocity omega
//   interior nodes 1 .. n-1 carry curvature, stored in kappa[i-1]
//
// The base element is clamped: node 0 at the origin, theta[0] = 0.  In the
// inextensible mode node 1 is additionally pinned at (ds, 0) and all angles
// follow the edge tangents; bending then acts on the positions through the
// transverse component of the internal stress, n2 = -dm/ds.

struct RodParameters {
  double L = 0.2;             // arm length [m]
  double r_base = 0.01;       // cross-section radius at the base [m]
  double r_tip = 0.001;       // cross-section radius at the tip [m]
  double rho = 1042.0;        // tissue density [kg/m^3]
  double E = 1.0e4;           // Young's modulus [Pa]
  double G = 1.0e4 / 3.0;     // shear modulus [Pa]
  double xi = 0.01;           // internal damping per unit length [kg/(m s)]
  double rho_water = 1022.0;  // ambient fluid density [kg/m^3]
  double xi_tan = 0.155;      // tangential drag coefficient
  double xi_per = 5.065;      // perpendicular drag coefficient
  int n_elem = 100;

  double ds() const { return L / n_elem; }
  void validate() const;  // throws ConfigError on nonsense values
};

// Linear taper; A = pi r^2, I = A^2 / (4 pi).
double rod_radius(const RodParameters& p, double s);
double rod_area(const RodParameters& p, double s);
double rod_moment(const RodParameters& p, double s);

enum class RodMode { constrained, extensible };

struct RodState {
  std::vector<Vec2> pos;      // n+1
  std::vector<Vec2> vel;      // n+1
  std::vector<double> theta;  // n
  std::vector<double> omega;  // n
  double time = 0.0;

  int n_elem() const { return static_cast<int>(theta.size()); }
};

struct Deformations {
  std::vector<double> nu1;    // n, tangential stretch (1 at rest)
  std::vector<double> nu2;    // n, shear
  std::vector<double> kappa;  // n-1, curvature at interior nodes [1/m]
};

RodState make_straight_state(const RodParameters& p);

// Rebuild positions and angles from deformations (clamped base, zero
// velocity).  Inverse of compute_deformations up to roundoff.
RodState make_state_from_deformations(const RodParameters& p, const Deformations& d);

Deformations compute_deformations(const RodState& s, const RodParameters& p);

// Per-element and per-node geometric helpers.
Vec2 element_midpoint(const RodState& s, int e);
double node_angle(const RodState& s, int k);  // average of adjacent element angles
std::vector<double> element_midpoint_s(const RodParameters& p);

// Passive internal loads from the current deformations.  n1/n2 are the
// tangential and normal stress components per element; m is the bending
// couple at interior nodes (size n-1).
struct ElementStress {
  std::vector<double> n1;
  std::vector<double> n2;
  std::vector<double> m;
};
ElementStress passive_stress(const Deformations& d, const RodParameters& p);

// Quadratic water drag per unit length for a station of radius r moving at
// `vel`, with the local tangent at angle `theta`.
Vec2 drag_force_per_length(const RodParameters& p, double r, double theta, const Vec2& vel);

// Node mass (half elements at the ends) and element rotary inertia.
std::vector<double> node_masses(const RodParameters& p);
std::vector<double> element_inertia(const RodParameters& p);

double kinetic_energy(const RodState& s, const RodParameters& p, bool include_rotary);
double elastic_energy(const Deformations& d, const RodParameters& p);

// Enforce edge lengths (base outward) and slave angles to the edge tangents.
// Velocities are left untouched; the incompatible radial components carry
// negligible momentum at these stiffnesses and decay through the drag.
void project_positions(RodState& s, const RodParameters& p);

}  // namespace octoarm

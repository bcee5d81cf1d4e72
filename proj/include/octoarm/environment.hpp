#pragma once

#include <vector>

#include "octoarm/core.hpp"

namespace octoarm {

// Planar chemical environment.  A source at the target diffuses into open
// water; at steady state the concentration falls off as a log of distance,
//   c(rho) = -(1/mu) ln(rho / L),
// with L the arm length as the reference scale.  The closed loop reads this
// profile directly; the grid solver exists to check that a diffusing field
// driven by a point deposit, with the boundary held at the profile, actually
// relaxes to it.

struct EnvironmentParams {
  double mu = 2.0;          // log-profile decay constant
  double diffusivity = 1.0; // [m^2/s]

  void validate() const;
};

// Throws std::domain_error for rho <= 0.
double steady_concentration(double rho, double L, double mu);
double concentration_to_distance(double c, double L, double mu);

struct PolarView {
  double rho = 0.0;    // distance to target [m]
  double alpha = 0.0;  // bearing relative to the local tangent, in (-pi, pi]
};

// rho = |target - position|, alpha = atan2 of the offset minus theta.
// A degenerate zero offset reports alpha = 0.
PolarView distance_bearing(const Vec2& target, const Vec2& position, double theta);

// Explicit five-point diffusion on a cell-centered rectangle.  The outer ring
// of cells is pinned to the steady profile; every step the source deposits
//   dt * (2 pi D / mu) / (hx * hy)
// into its containing cell, the strength that makes the pinned log profile a
// discrete fixed point up to truncation error.
class DiffusionField {
 public:
  DiffusionField(Vec2 lo, Vec2 hi, int nx, int ny, const Vec2& source, double L,
                 const EnvironmentParams& params);

  double max_stable_dt() const;
  void step(double dt);  // throws ConfigError beyond the stability limit
  // Steps until the largest per-step change falls below tol; returns steps taken.
  int run_to_steady(double dt, double tol, int max_steps);

  // Bilinear between cell centers; points outside the span of centers are
  // clamped and counted in oob_samples().
  double sample(const Vec2& p) const;
  double analytic(const Vec2& p) const;  // steady profile at p
  long oob_samples() const { return oob_samples_; }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  Vec2 cell_center(int i, int j) const;
  double value(int i, int j) const { return c_[idx(i, j)]; }
  Vec2 source() const { return source_; }
  int source_i() const { return src_i_; }
  int source_j() const { return src_j_; }
  double deposit_rate() const;  // concentration added to the source cell per unit time

  // Total interior concentration times cell area (boundary ring excluded).
  double interior_mass() const;
  // Net diffusive flux into the interior through the pinned ring, per unit time,
  // evaluated at the current state.  One explicit step changes interior_mass by
  // dt * (boundary_influx + deposit_rate * hx * hy).
  double boundary_influx() const;

 private:
  int idx(int i, int j) const { return j * nx_ + i; }
  bool pinned(int i, int j) const;

  Vec2 lo_, hi_, source_;
  int nx_, ny_;
  int src_i_, src_j_;
  double hx_, hy_, L_;
  EnvironmentParams params_;
  std::vector<double> c_;
  std::vector<double> scratch_;
  mutable long oob_samples_ = 0;
};

}  // namespace octoarm

#pragma once

#include <vector>

#include "octoarm/core.hpp"

namespace octoarm {

// Leaky cable with a linear recovery current, discretized cell-centered with
// ghost values at both ends:
//
//   tau  V_t = lambda^2 V_ss - V - W + I
//   tauw W_t = -W + b max(V, 0)
//
// V is a membrane voltage in mV, s runs along the arm in meters.  One cable
// per muscle group; the input I is the control current (already in mV).

struct CableParams {
  double tau = 0.04;     // membrane time constant [s]
  double tau_w = 0.4;    // recovery time constant [s]
  double lambda = 0.02;  // electrotonic length [m]
  double b = 1.0;        // recovery gain

  void validate() const;
};

enum class CableBcType { dirichlet, neumann };

struct CableBc {
  CableBcType type = CableBcType::neumann;
  double value = 0.0;  // face voltage for dirichlet
};

struct CableState {
  std::vector<double> V;
  std::vector<double> W;
};

CableState make_cable_state(int m);

// Time derivatives at the current state; h is the cell width.
void cable_rhs(const CableParams& p, const CableState& s, const std::vector<double>& I,
               double h, CableBc left, CableBc right,
               std::vector<double>& dV, std::vector<double>& dW);

// Classic fourth-order Runge-Kutta step.  Throws NumericsError if the state
// leaves the validity envelope (non-finite or |V| beyond 1e6).
void step_cable(CableState& s, const CableParams& p, const std::vector<double>& I,
                double h, double dt, CableBc left, CableBc right);

// Steady state of the full system, where W = b max(V,0).  Semismooth Newton
// on the piecewise-linear residual; tridiagonal solve per iteration.
std::vector<double> solve_cable_static(const CableParams& p, const std::vector<double>& I,
                                       double h, CableBc left, CableBc right);

// Same fixed point, reached by damped implicit relaxation (backward Euler in
// V with the recovery current lagged).  Cross-check for the Newton solve and
// workhorse for fine grids.
std::vector<double> relax_cable_static(const CableParams& p, const std::vector<double>& I,
                                       double h, CableBc left, CableBc right,
                                       double pseudo_dt = 0.1, int max_sweeps = 100000,
                                       double tol = 1.0e-13);

// Analytic zero-input steady profile between two clamped end voltages.  The
// decay length differs between depolarized and hyperpolarized stretches, so
// mixed-sign end data produce two branches glued at a crossing point found by
// matching slopes.
struct RestProfile {
  double v_left = 0.0;
  double v_right = 0.0;
  double length = 0.0;
  double lambda_left = 0.0;   // decay length on the left branch
  double lambda_right = 0.0;  // decay length on the right branch
  double crossing = -1.0;     // crossing position, or -1 for a single branch

  double eval(double s) const;
};

RestProfile rest_voltage_profile(const CableParams& p, double v_left, double v_right,
                                 double length);

// Saturating map from voltage to muscle activation in [0,1]; 0.01 at 0 mV,
// 0.5 at 40 mV, 0.99 at 80 mV.
double activation_sigmoid(double v);

}  // namespace octoarm

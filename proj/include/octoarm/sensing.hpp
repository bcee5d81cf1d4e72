#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "octoarm/core.hpp"
#include "octoarm/rng.hpp"

namespace octoarm {

// Firing-rate transfer of a ring neuron, h(V) = 6.34 ln^0.8(1 + e^{10(V+0.5)}),
// strictly positive and increasing.  The inverse brackets and bisects to 1e-10
// and throws std::domain_error for a non-positive rate.
double ring_transfer(double v);
double ring_transfer_inverse(double rate);

// Canonical bump: desired rate profile over ring angle and the voltage profile
// that produces it through h.
double desired_rate(double phi);
double desired_voltage(double phi);

// Recurrent kernel built from the lowest eleven Fourier modes of the desired
// profiles, W_n = V_n conj(f_n) / (0.01 + |f_n|^2), with coefficients taken by
// discrete quadrature on the ring grid.  w and dw sample the kernel and its
// derivative at the grid offsets; imag_residue records the largest imaginary
// part left by the complex reconstruction (the modes come in conjugate pairs,
// so it should vanish).
struct RingKernel {
  int size = 0;
  std::vector<double> w;
  std::vector<double> dw;
  std::vector<std::complex<double>> modes;  // n = -5..5 at index n+5
  double imag_residue = 0.0;
};
RingKernel build_ring_kernel(int size);

struct RingState {
  std::vector<double> V;
};

// Voltage bump centred at `phase`, sampled from desired_voltage.
RingState ring_bump_state(int size, double phase);

// One Euler step of tau dV/dt = -V + ((W + gamma W') * h(V)) where * is the
// cyclic average (1/M) sum_j K(phi_i - phi_j) h(V_j), evaluated through the
// kernel modes.  gamma slides the bump at rate -gamma/tau.  Throws
// NumericsError when the state stops being finite.
void step_ring(RingState& s, const RingKernel& k, double tau, double gamma, double dt);

// Peak of the bump in [0, 2pi): argmax over the grid (ties toward the smaller
// index) refined by quadratic interpolation through the two neighbours.
// Throws NumericsError when the profile is flat (max - min < 1e-9).
double decode_ring(const RingState& s);

struct SensingParams {
  int n_units = 21;
  double k_theta = 5.0e4;
  double k_r = 4.0e4;
  double k_mu = 4.0e4;
  double mu = 2.0;      // true source intensity
  int ring_size = 100;
  double ring_tau = 0.01;
  void validate() const;
};

// Everything downstream works in units of the arm length: positions and
// distances are r/L, arc spacing is 1/(n_units-1), and curvature inputs are
// kappa * L so that kappa * ds is the turning angle in radians.
double unit_spacing(const SensingParams& sp);
std::vector<double> unit_arclengths(const SensingParams& sp);

struct ArmSenseInputs {
  std::vector<double> kappa;  // kappa * L per unit
  std::vector<double> conc;   // concentration reading per unit
};

struct ConsensusState {
  std::vector<double> theta;  // local shape angle estimates, continuous lift
  std::vector<double> alpha;  // local bearing estimates, continuous lift
  std::vector<double> mu;     // local source intensity estimates
};

// Target position a single unit believes, pos + e^{-mu c} (cos, sin)(theta+alpha),
// everything in arm lengths.
Vec2 target_estimate(const Vec2& pos, double theta_hat, double alpha_hat,
                     double mu_hat, double conc);

// Mean distance between the per-unit estimates and the true target.
double sensing_error(const std::vector<Vec2>& estimates, const Vec2& target);

// Shape consensus energy
//   E = (k_theta/2) sum_i (1 - cos(theta_i - theta_{i-1} - kbar_i ds))
// with theta_0 := 0, a zero-length first link, and kbar_i the average of the
// curvature readings at units i and i-1.  gamma_theta returns
// ring_tau * dE/dtheta_i (the raw gradient, including the pinned first unit).
void proprio_gradient(const ConsensusState& st, const ArmSenseInputs& in,
                      const SensingParams& sp, double* energy,
                      std::vector<double>* gamma_theta);

// Target consensus gradients.  Neighbour disagreement of the per-unit target
// estimates is approximated with local quantities only: the position of unit j
// relative to unit i enters through ds and the curvature reading, never
// through the actual node positions.  energy_local scores that approximation
// (it is what the alpha and mu flows descend exactly); energy uses the true
// unit positions when they are supplied and falls back to energy_local
// otherwise.  gamma_alpha already carries the -gamma_theta compensation for
// whatever theta velocity the caller reports.
struct ChemoGradient {
  double energy_local = 0.0;
  double energy = 0.0;
  std::vector<double> gamma_alpha;  // ring_tau * dE/dalpha_i - gamma_theta_i
  std::vector<double> mu_rate;      // d mu_i / dt
};
ChemoGradient chemo_gradient(const ConsensusState& st, const ArmSenseInputs& in,
                             const SensingParams& sp,
                             const std::vector<double>& gamma_theta,
                             const std::vector<Vec2>* unit_positions = nullptr);

enum class SensingMode { direct, rings };

struct SensorArrayOptions {
  SensingMode mode = SensingMode::direct;
  bool pin_mu = false;       // hold every mu at the true value
  bool track_rings = false;  // keep rings in sync in direct mode, for checks
};

// Bank of estimate dynamics for all units: two rings (theta, alpha) plus a mu
// integrator per unit.  In direct mode the estimates follow the gradient
// flows by explicit substepped Euler; in rings mode each estimate lives in
// its attractor, the gradients enter as slide rates (saturated to half a grid
// cell per step), and the estimate is the decoded, continuously lifted peak.
// The first unit's shape angle is pinned to zero in either mode, and its
// pinned (zero) velocity is what enters the alpha compensation.
class SensorArray {
 public:
  SensorArray(const SensingParams& sp, const SensorArrayOptions& opt, std::uint64_t seed);

  // Advance the estimates by dt against the given sensory inputs.
  void step(const ArmSenseInputs& in, double dt);

  // Replace the estimates wholesale (rings are re-seeded at the new phases).
  // Used by harnesses that start the consensus at a chosen operating point.
  void reset_state(const ConsensusState& st);

  const ConsensusState& estimates() const { return est_; }
  ConsensusState& estimates() { return est_; }
  const SensingParams& params() const { return sp_; }
  const SensorArrayOptions& options() const { return opt_; }

  double last_e_prop() const { return last_e_prop_; }
  double last_e_chemo() const { return last_e_chemo_; }

  const RingState& theta_ring(int i) const { return theta_rings_[i]; }
  const RingState& alpha_ring(int i) const { return alpha_rings_[i]; }
  const RingKernel& kernel() const { return kernel_; }

  // Largest |decoded ring peak - estimate| across units, for fidelity checks.
  double ring_estimate_gap() const;

 private:
  void step_direct(const ArmSenseInputs& in, double dt);
  void step_rings(const ArmSenseInputs& in, double dt);

  SensingParams sp_;
  SensorArrayOptions opt_;
  RingKernel kernel_;
  ConsensusState est_;
  std::vector<RingState> theta_rings_, alpha_rings_;
  std::vector<double> theta_decoded_, alpha_decoded_;  // last decoded peaks
  double last_e_prop_ = 0.0;
  double last_e_chemo_ = 0.0;
};

}  // namespace octoarm

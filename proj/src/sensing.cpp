#include "octoarm/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace octoarm {

double ring_transfer(double v) {
  double x = 10.0 * (v + 0.5);
  double t = (x > 30.0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  return 6.34 * std::pow(t, 0.8);
}

double ring_transfer_inverse(double rate) {
  if (!(rate > 0.0)) throw std::domain_error("ring_transfer_inverse: rate must be positive");
  double lo = -1.0, hi = 1.0;
  while (ring_transfer(lo) > rate) {
    lo *= 2.0;
    if (lo < -1.0e6) throw std::domain_error("ring_transfer_inverse: rate below range");
  }
  while (ring_transfer(hi) < rate) {
    hi *= 2.0;
    if (hi > 1.0e6) throw std::domain_error("ring_transfer_inverse: rate above range");
  }
  while (hi - lo > 0.5e-10) {
    double mid = 0.5 * (lo + hi);
    if (ring_transfer(mid) < rate)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double desired_rate(double phi) {
  return 2.53 + 34.8 * std::exp(8.08 * (std::cos(phi) - 1.0));
}

double desired_voltage(double phi) {
  return ring_transfer_inverse(desired_rate(phi));
}

RingKernel build_ring_kernel(int size) {
  if (size < 12) throw ConfigError("ring kernel needs more grid points than modes");
  RingKernel k;
  k.size = size;
  double dphi = 2.0 * kPi / size;
  std::vector<double> f(size), v(size);
  for (int j = 0; j < size; ++j) {
    f[j] = desired_rate(j * dphi);
    v[j] = desired_voltage(j * dphi);
  }
  k.modes.assign(11, std::complex<double>(0.0, 0.0));
  for (int n = -5; n <= 5; ++n) {
    std::complex<double> fh(0.0, 0.0), vh(0.0, 0.0);
    for (int j = 0; j < size; ++j) {
      std::complex<double> e = std::polar(1.0, -n * j * dphi);
      fh += f[j] * e;
      vh += v[j] * e;
    }
    fh /= static_cast<double>(size);
    vh /= static_cast<double>(size);
    k.modes[n + 5] = vh * std::conj(fh) / (0.01 + std::norm(fh));
  }
  k.w.resize(size);
  k.dw.resize(size);
  double residue = 0.0;
  for (int j = 0; j < size; ++j) {
    std::complex<double> w(0.0, 0.0), dw(0.0, 0.0);
    for (int n = -5; n <= 5; ++n) {
      std::complex<double> e = std::polar(1.0, n * j * dphi);
      w += k.modes[n + 5] * e;
      dw += k.modes[n + 5] * std::complex<double>(0.0, n) * e;
    }
    k.w[j] = w.real();
    k.dw[j] = dw.real();
    residue = std::max(residue, std::max(std::fabs(w.imag()), std::fabs(dw.imag())));
  }
  k.imag_residue = residue;
  return k;
}

RingState ring_bump_state(int size, double phase) {
  RingState s;
  s.V.resize(size);
  double dphi = 2.0 * kPi / size;
  for (int j = 0; j < size; ++j) s.V[j] = desired_voltage(j * dphi - phase);
  return s;
}

void step_ring(RingState& s, const RingKernel& k, double tau, double gamma, double dt) {
  int m = k.size;
  double dphi = 2.0 * kPi / m;
  // Rate transform once, then the convolution through the kernel modes; the
  // kernel holds only |n| <= 5, so the mode product equals the cyclic sum.
  std::complex<double> hh[6];
  for (int n = 0; n <= 5; ++n) hh[n] = std::complex<double>(0.0, 0.0);
  std::vector<double> rate(m);
  for (int j = 0; j < m; ++j) rate[j] = ring_transfer(s.V[j]);
  for (int j = 0; j < m; ++j) {
    for (int n = 0; n <= 5; ++n) hh[n] += rate[j] * std::polar(1.0, -n * j * dphi);
  }
  for (int n = 0; n <= 5; ++n) hh[n] /= static_cast<double>(m);
  for (int i = 0; i < m; ++i) {
    std::complex<double> mix = k.modes[5] * hh[0];  // n = 0
    for (int n = 1; n <= 5; ++n) {
      std::complex<double> wn = k.modes[n + 5] * (1.0 + std::complex<double>(0.0, gamma * n));
      mix += 2.0 * (wn * hh[n] * std::polar(1.0, n * i * dphi)).real();
    }
    s.V[i] += dt / tau * (-s.V[i] + mix.real());
  }
  for (double v : s.V)
    if (!std::isfinite(v)) throw NumericsError("ring state left the validity envelope");
}

double decode_ring(const RingState& s) {
  int m = static_cast<int>(s.V.size());
  int best = 0;
  double vmin = s.V[0], vmax = s.V[0];
  for (int i = 1; i < m; ++i) {
    if (s.V[i] > s.V[best]) best = i;
    vmin = std::min(vmin, s.V[i]);
    vmax = std::max(vmax, s.V[i]);
  }
  if (vmax - vmin < 1.0e-9) throw NumericsError("ring profile is flat, no bump to decode");
  double dphi = 2.0 * kPi / m;
  double vl = s.V[(best + m - 1) % m], vc = s.V[best], vr = s.V[(best + 1) % m];
  double den = vl - 2.0 * vc + vr;
  double delta = (den != 0.0) ? 0.5 * (vl - vr) / den : 0.0;
  delta = std::min(std::max(delta, -0.5), 0.5);
  double peak = best * dphi + delta * dphi;
  peak = std::fmod(peak, 2.0 * kPi);
  if (peak < 0.0) peak += 2.0 * kPi;
  return peak;
}

void SensingParams::validate() const {
  if (n_units < 2) throw ConfigError("sensing: need at least 2 units");
  if (k_theta < 0.0 || k_r < 0.0 || k_mu < 0.0)
    throw ConfigError("sensing: consensus gains must be non-negative");
  if (!(mu > 0.0)) throw ConfigError("sensing: source intensity must be positive");
  if (ring_size < 12) throw ConfigError("sensing: ring size too small");
  if (!(ring_tau > 0.0)) throw ConfigError("sensing: ring time constant must be positive");
}

double unit_spacing(const SensingParams& sp) {
  return 1.0 / (sp.n_units - 1);
}

std::vector<double> unit_arclengths(const SensingParams& sp) {
  std::vector<double> s(sp.n_units);
  double ds = unit_spacing(sp);
  for (int i = 0; i < sp.n_units; ++i) s[i] = i * ds;
  return s;
}

Vec2 target_estimate(const Vec2& pos, double theta_hat, double alpha_hat,
                     double mu_hat, double conc) {
  double reach = std::exp(-mu_hat * conc);
  double ang = theta_hat + alpha_hat;
  return pos + reach * Vec2(std::cos(ang), std::sin(ang));
}

double sensing_error(const std::vector<Vec2>& estimates, const Vec2& target) {
  double sum = 0.0;
  for (const Vec2& e : estimates) sum += norm(e - target);
  return estimates.empty() ? 0.0 : sum / static_cast<double>(estimates.size());
}

void proprio_gradient(const ConsensusState& st, const ArmSenseInputs& in,
                      const SensingParams& sp, double* energy,
                      std::vector<double>* gamma_theta) {
  int N = sp.n_units;
  double ds = unit_spacing(sp);
  std::vector<double> D(N);
  D[0] = st.theta[0];  // virtual anchor at zero with a zero-length link
  for (int i = 1; i < N; ++i) {
    double kbar = 0.5 * (in.kappa[i] + in.kappa[i - 1]);
    D[i] = st.theta[i] - st.theta[i - 1] - kbar * ds;
  }
  if (energy) {
    double e = 0.0;
    for (int i = 0; i < N; ++i) e += 1.0 - std::cos(D[i]);
    *energy = 0.5 * sp.k_theta * e;
  }
  if (gamma_theta) {
    gamma_theta->resize(N);
    for (int i = 0; i < N; ++i) {
      double g = std::sin(D[i]);
      if (i + 1 < N) g -= std::sin(D[i + 1]);
      (*gamma_theta)[i] = sp.ring_tau * 0.5 * sp.k_theta * g;
    }
  }
}

ChemoGradient chemo_gradient(const ConsensusState& st, const ArmSenseInputs& in,
                             const SensingParams& sp,
                             const std::vector<double>& gamma_theta,
                             const std::vector<Vec2>* unit_positions) {
  int N = sp.n_units;
  double ds = unit_spacing(sp);
  ChemoGradient out;
  out.gamma_alpha.resize(N);
  out.mu_rate.resize(N);

  // Neighbor position differences rebuilt from local data only.  Each
  // inter-unit stretch is treated as an arc of constant curvature (the mean
  // of the two readings), giving the chord vector
  //   r_{i+1} - r_i = (2/kbar) sin(kbar ds/2) * u(theta_i + kbar ds/2).
  // The far-field consensus mode is soft, so the crude one-sided forms
  // (-u(theta_i) ds at the ends, kappa_i ds^2 normal inside) leak an O(ds^2)
  // torque that the target estimate amplifies with range squared; the chord
  // form keeps the anchor exact for uniform bends.
  auto chord = [ds](double kbar) {
    double a = 0.5 * kbar * ds;
    return std::fabs(a) < 1.0e-8 ? ds : std::sin(a) / a * ds;
  };
  std::vector<double> e(N);
  std::vector<Vec2> uvec(N), d(N);
  for (int i = 0; i < N; ++i) {
    e[i] = std::exp(-st.mu[i] * in.conc[i]);
    double ang = st.theta[i] + st.alpha[i];
    uvec[i] = Vec2(std::cos(ang), std::sin(ang));
    Vec2 acc(0.0, 0.0);
    if (i > 0) {
      double kbar = 0.5 * (in.kappa[i] + in.kappa[i - 1]);
      double th = st.theta[i] - 0.5 * kbar * ds;
      acc += chord(kbar) * Vec2(std::cos(th), std::sin(th));
    }
    if (i + 1 < N) {
      double kbar = 0.5 * (in.kappa[i] + in.kappa[i + 1]);
      double th = st.theta[i] + 0.5 * kbar * ds;
      acc -= chord(kbar) * Vec2(std::cos(th), std::sin(th));
    }
    d[i] = acc;
  }

  double e_local = 0.0;
  for (int i = 0; i + 1 < N; ++i) {
    Vec2 gap = e[i] * uvec[i] - e[i + 1] * uvec[i + 1];
    double dmu = st.mu[i] - st.mu[i + 1];
    e_local += sp.k_r * norm2(gap) + sp.k_mu * dmu * dmu;
  }
  for (int i = 0; i < N; ++i) e_local += 2.0 * sp.k_r * dot(d[i], e[i] * uvec[i]);
  out.energy_local = e_local;

  if (unit_positions) {
    double e_true = 0.0;
    for (int i = 0; i + 1 < N; ++i) {
      Vec2 ri = (*unit_positions)[i] + e[i] * uvec[i];
      Vec2 rj = (*unit_positions)[i + 1] + e[i + 1] * uvec[i + 1];
      double dmu = st.mu[i] - st.mu[i + 1];
      e_true += sp.k_r * norm2(ri - rj) + sp.k_mu * dmu * dmu;
    }
    out.energy = e_true;
  } else {
    out.energy = e_local;
  }

  for (int i = 0; i < N; ++i) {
    Vec2 g = d[i];
    double mu_diff = 0.0;
    for (int j : {i - 1, i + 1}) {
      if (j < 0 || j >= N) continue;
      g += e[i] * uvec[i] - e[j] * uvec[j];
      mu_diff += st.mu[i] - st.mu[j];
    }
    Vec2 up(-uvec[i].y, uvec[i].x);
    out.gamma_alpha[i] = sp.ring_tau * 2.0 * sp.k_r * e[i] * dot(g, up) - gamma_theta[i];
    out.mu_rate[i] = 2.0 * sp.k_r * in.conc[i] * e[i] * dot(g, uvec[i]) - 2.0 * sp.k_mu * mu_diff;
  }
  return out;
}

SensorArray::SensorArray(const SensingParams& sp, const SensorArrayOptions& opt,
                         std::uint64_t seed)
    : sp_(sp), opt_(opt) {
  sp_.validate();
  int N = sp_.n_units;
  RngStream th(seed, streams::kInitTheta), al(seed, streams::kInitAlpha),
      mu(seed, streams::kInitMu);
  est_.theta.resize(N);
  est_.alpha.resize(N);
  est_.mu.resize(N);
  for (int i = 0; i < N; ++i) {
    est_.theta[i] = th.uniform(i, -0.1 * kPi, 0.1 * kPi);
    est_.alpha[i] = al.uniform(i, 0.0, kPi);
    est_.mu[i] = mu.uniform(i, 0.5 * sp_.mu, 1.5 * sp_.mu);
  }
  est_.theta[0] = 0.0;  // the base unit anchors the shape consensus
  if (opt_.pin_mu)
    for (int i = 0; i < N; ++i) est_.mu[i] = sp_.mu;
  if (opt_.mode == SensingMode::rings || opt_.track_rings) {
    kernel_ = build_ring_kernel(sp_.ring_size);
    theta_rings_.resize(N);
    alpha_rings_.resize(N);
    theta_decoded_.resize(N);
    alpha_decoded_.resize(N);
    for (int i = 0; i < N; ++i) {
      theta_rings_[i] = ring_bump_state(sp_.ring_size, est_.theta[i]);
      alpha_rings_[i] = ring_bump_state(sp_.ring_size, est_.alpha[i]);
      theta_decoded_[i] = decode_ring(theta_rings_[i]);
      alpha_decoded_[i] = decode_ring(alpha_rings_[i]);
    }
  }
}

void SensorArray::step(const ArmSenseInputs& in, double dt) {
  if (opt_.mode == SensingMode::direct)
    step_direct(in, dt);
  else
    step_rings(in, dt);
}

void SensorArray::reset_state(const ConsensusState& st) {
  int N = sp_.n_units;
  if (static_cast<int>(st.theta.size()) != N || static_cast<int>(st.alpha.size()) != N ||
      static_cast<int>(st.mu.size()) != N)
    throw ConfigError("consensus state size does not match the unit count");
  est_ = st;
  est_.theta[0] = 0.0;
  if (opt_.pin_mu)
    for (int i = 0; i < N; ++i) est_.mu[i] = sp_.mu;
  if (!theta_rings_.empty()) {
    for (int i = 0; i < N; ++i) {
      theta_rings_[i] = ring_bump_state(sp_.ring_size, est_.theta[i]);
      alpha_rings_[i] = ring_bump_state(sp_.ring_size, est_.alpha[i]);
      theta_decoded_[i] = decode_ring(theta_rings_[i]);
      alpha_decoded_[i] = decode_ring(alpha_rings_[i]);
    }
  }
}

void SensorArray::step_direct(const ArmSenseInputs& in, double dt) {
  int N = sp_.n_units;
  double remaining = dt;
  std::vector<double> gth, gth_applied(N);
  while (remaining > 0.0) {
    proprio_gradient(est_, in, sp_, &last_e_prop_, &gth);
    gth_applied = gth;
    gth_applied[0] = 0.0;  // pinned unit reports no angular velocity
    ChemoGradient cg = chemo_gradient(est_, in, sp_, gth_applied, nullptr);
    last_e_chemo_ = cg.energy_local;

    // Conservative stiffness bound for the explicit flow, plus a cap on the
    // angular motion per substep.
    double bound = 2.0 * sp_.k_theta + 4.0 * sp_.k_mu;
    double max_rate = 0.0;
    for (int i = 0; i < N; ++i) {
      double ei = std::exp(-est_.mu[i] * in.conc[i]);
      double ci = std::fabs(in.conc[i]);
      bound = std::max(bound, 2.0 * sp_.k_theta + 4.0 * sp_.k_r * ei * ei * (1.0 + ci * ci) +
                                  4.0 * sp_.k_mu);
      double rt = (i == 0) ? 0.0 : std::fabs(gth[i]) / sp_.ring_tau;
      double ra = std::fabs(cg.gamma_alpha[i]) / sp_.ring_tau;
      max_rate = std::max(max_rate, std::max(rt, ra));
    }
    if (!std::isfinite(bound) || !std::isfinite(max_rate))
      throw NumericsError("estimate flow produced a non-finite rate");
    double h = std::min(remaining, 1.5 / (1.2 * bound));
    if (max_rate * h > 0.05) h = 0.05 / max_rate;
    if (!(h > 0.0)) throw NumericsError("estimate flow substep collapsed");

    for (int i = 1; i < N; ++i) est_.theta[i] -= h / sp_.ring_tau * gth[i];
    for (int i = 0; i < N; ++i) est_.alpha[i] -= h / sp_.ring_tau * cg.gamma_alpha[i];
    if (!opt_.pin_mu)
      for (int i = 0; i < N; ++i) est_.mu[i] += h * cg.mu_rate[i];
    remaining -= h;

    if (opt_.track_rings) {
      double gmax = sp_.ring_tau * (2.0 * kPi / sp_.ring_size) / (2.0 * h);
      for (int i = 0; i < N; ++i) {
        double gt = (i == 0) ? 0.0 : std::min(std::max(gth[i], -gmax), gmax);
        double ga = std::min(std::max(cg.gamma_alpha[i], -gmax), gmax);
        step_ring(theta_rings_[i], kernel_, sp_.ring_tau, gt, h);
        step_ring(alpha_rings_[i], kernel_, sp_.ring_tau, ga, h);
      }
    }
  }
}

void SensorArray::step_rings(const ArmSenseInputs& in, double dt) {
  int N = sp_.n_units;
  double dphi = 2.0 * kPi / sp_.ring_size;
  double gmax = sp_.ring_tau * dphi / (2.0 * dt);  // half a grid cell per step
  std::vector<double> gth;
  proprio_gradient(est_, in, sp_, &last_e_prop_, &gth);
  std::vector<double> gth_sat(N);
  for (int i = 0; i < N; ++i)
    gth_sat[i] = (i == 0) ? 0.0 : std::min(std::max(gth[i], -gmax), gmax);
  ChemoGradient cg = chemo_gradient(est_, in, sp_, gth_sat, nullptr);
  last_e_chemo_ = cg.energy_local;
  for (int i = 0; i < N; ++i) {
    double ga = std::min(std::max(cg.gamma_alpha[i], -gmax), gmax);
    step_ring(theta_rings_[i], kernel_, sp_.ring_tau, gth_sat[i], dt);
    step_ring(alpha_rings_[i], kernel_, sp_.ring_tau, ga, dt);
    double td = decode_ring(theta_rings_[i]);
    double ad = decode_ring(alpha_rings_[i]);
    est_.theta[i] += wrap_angle(td - theta_decoded_[i]);
    est_.alpha[i] += wrap_angle(ad - alpha_decoded_[i]);
    theta_decoded_[i] = td;
    alpha_decoded_[i] = ad;
    if (!opt_.pin_mu) est_.mu[i] += dt * cg.mu_rate[i];
  }
}

double SensorArray::ring_estimate_gap() const {
  if (theta_rings_.empty()) return 0.0;
  double worst = 0.0;
  for (int i = 0; i < sp_.n_units; ++i) {
    double td = decode_ring(theta_rings_[i]);
    double ad = decode_ring(alpha_rings_[i]);
    worst = std::max(worst, std::fabs(wrap_angle(td - est_.theta[i])));
    worst = std::max(worst, std::fabs(wrap_angle(ad - est_.alpha[i])));
  }
  return worst;
}

}  // namespace octoarm

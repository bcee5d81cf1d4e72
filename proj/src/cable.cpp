#include "octoarm/cable.hpp"

#include <algorithm>
#include <cmath>

namespace octoarm {

void CableParams::validate() const {
  if (!(tau > 0.0) || !(tau_w > 0.0)) throw ConfigError("cable: time constants must be positive");
  if (!(lambda > 0.0)) throw ConfigError("cable: electrotonic length must be positive");
  if (b < 0.0) throw ConfigError("cable: recovery gain must be non-negative");
}

CableState make_cable_state(int m) {
  CableState s;
  s.V.assign(m, 0.0);
  s.W.assign(m, 0.0);
  return s;
}

namespace {

inline double ghost_value(const std::vector<double>& V, CableBc bc, bool left) {
  double edge = left ? V.front() : V.back();
  if (bc.type == CableBcType::dirichlet) return 2.0 * bc.value - edge;
  return edge;  // zero-flux mirror
}

}  // namespace

void cable_rhs(const CableParams& p, const CableState& s, const std::vector<double>& I,
               double h, CableBc left, CableBc right,
               std::vector<double>& dV, std::vector<double>& dW) {
  int m = static_cast<int>(s.V.size());
  dV.resize(m);
  dW.resize(m);
  double diff = p.lambda * p.lambda / (h * h);
  double gl = ghost_value(s.V, left, true);
  double gr = ghost_value(s.V, right, false);
  for (int i = 0; i < m; ++i) {
    double vm = (i == 0) ? gl : s.V[i - 1];
    double vp = (i == m - 1) ? gr : s.V[i + 1];
    dV[i] = (diff * (vm - 2.0 * s.V[i] + vp) - s.V[i] - s.W[i] + I[i]) / p.tau;
    dW[i] = (-s.W[i] + p.b * std::max(s.V[i], 0.0)) / p.tau_w;
  }
}

void step_cable(CableState& s, const CableParams& p, const std::vector<double>& I,
                double h, double dt, CableBc left, CableBc right) {
  int m = static_cast<int>(s.V.size());
  static thread_local std::vector<double> k1v, k1w, k2v, k2w, k3v, k3w, k4v, k4w;
  static thread_local CableState tmp;
  tmp.V.resize(m);
  tmp.W.resize(m);

  cable_rhs(p, s, I, h, left, right, k1v, k1w);
  for (int i = 0; i < m; ++i) {
    tmp.V[i] = s.V[i] + 0.5 * dt * k1v[i];
    tmp.W[i] = s.W[i] + 0.5 * dt * k1w[i];
  }
  cable_rhs(p, tmp, I, h, left, right, k2v, k2w);
  for (int i = 0; i < m; ++i) {
    tmp.V[i] = s.V[i] + 0.5 * dt * k2v[i];
    tmp.W[i] = s.W[i] + 0.5 * dt * k2w[i];
  }
  cable_rhs(p, tmp, I, h, left, right, k3v, k3w);
  for (int i = 0; i < m; ++i) {
    tmp.V[i] = s.V[i] + dt * k3v[i];
    tmp.W[i] = s.W[i] + dt * k3w[i];
  }
  cable_rhs(p, tmp, I, h, left, right, k4v, k4w);
  for (int i = 0; i < m; ++i) {
    s.V[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    s.W[i] += dt / 6.0 * (k1w[i] + 2.0 * k2w[i] + 2.0 * k3w[i] + k4w[i]);
  }
  for (int i = 0; i < m; ++i) {
    if (!std::isfinite(s.V[i]) || !std::isfinite(s.W[i]) || std::fabs(s.V[i]) > 1.0e6)
      throw NumericsError("cable state left the validity envelope");
  }
}

namespace {

// Tridiagonal solve, destroys its inputs.
void thomas(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c,
            std::vector<double>& r, std::vector<double>& x) {
  int m = static_cast<int>(b.size());
  x.resize(m);
  for (int i = 1; i < m; ++i) {
    double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    r[i] -= w * r[i - 1];
  }
  x[m - 1] = r[m - 1] / b[m - 1];
  for (int i = m - 2; i >= 0; --i) x[i] = (r[i] - c[i] * x[i + 1]) / b[i];
}

// Assemble -lambda^2 V_ss + (1 + b 1[V>0]) V = I with the ghost closures;
// `active` marks cells with the recovery current engaged.
void assemble_static(const CableParams& p, const std::vector<double>& I, double h,
                     CableBc left, CableBc right, const std::vector<char>& active,
                     std::vector<double>& lo, std::vector<double>& di,
                     std::vector<double>& up, std::vector<double>& rhs) {
  int m = static_cast<int>(I.size());
  double diff = p.lambda * p.lambda / (h * h);
  lo.assign(m, -diff);
  up.assign(m, -diff);
  di.assign(m, 2.0 * diff + 1.0);
  rhs = I;
  for (int i = 0; i < m; ++i)
    if (active[i]) di[i] += p.b;
  if (left.type == CableBcType::dirichlet) {
    di[0] += diff;  // ghost = 2 value - V0
    rhs[0] += 2.0 * diff * left.value;
  } else {
    di[0] -= diff;  // ghost = V0
  }
  if (right.type == CableBcType::dirichlet) {
    di[m - 1] += diff;
    rhs[m - 1] += 2.0 * diff * right.value;
  } else {
    di[m - 1] -= diff;
  }
}

}  // namespace

std::vector<double> solve_cable_static(const CableParams& p, const std::vector<double>& I,
                                       double h, CableBc left, CableBc right) {
  int m = static_cast<int>(I.size());
  std::vector<double> V(m, 0.0), lo, di, up, rhs;
  std::vector<char> active(m, 0);
  double scale = 1.0;
  for (double v : I) scale = std::max(scale, std::fabs(v));
  if (left.type == CableBcType::dirichlet) scale = std::max(scale, std::fabs(left.value));
  if (right.type == CableBcType::dirichlet) scale = std::max(scale, std::fabs(right.value));

  for (int it = 0; it < 200; ++it) {
    assemble_static(p, I, h, left, right, active, lo, di, up, rhs);
    thomas(lo, di, up, rhs, V);
    bool changed = false;
    for (int i = 0; i < m; ++i) {
      char a = V[i] > 0.0 ? 1 : 0;
      if (a != active[i]) {
        active[i] = a;
        changed = true;
      }
    }
    if (!changed) {
      // Residual of the nonlinear problem at the solved V.
      double diff = p.lambda * p.lambda / (h * h);
      double gl = ghost_value(V, left, true);
      double gr = ghost_value(V, right, false);
      double worst = 0.0;
      for (int i = 0; i < m; ++i) {
        double vm = (i == 0) ? gl : V[i - 1];
        double vp = (i == m - 1) ? gr : V[i + 1];
        double r = diff * (vm - 2.0 * V[i] + vp) - V[i] - p.b * std::max(V[i], 0.0) + I[i];
        worst = std::max(worst, std::fabs(r));
      }
      if (worst <= 1.0e-10 * scale) return V;
    }
  }
  throw NumericsError("static cable solve did not converge");
}

std::vector<double> relax_cable_static(const CableParams& p, const std::vector<double>& I,
                                       double h, CableBc left, CableBc right,
                                       double pseudo_dt, int max_sweeps, double tol) {
  int m = static_cast<int>(I.size());
  std::vector<double> V(m, 0.0), lo, di, up, rhs;
  double diff = p.lambda * p.lambda / (h * h);
  double beta = p.tau / pseudo_dt;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    lo.assign(m, -diff);
    up.assign(m, -diff);
    di.assign(m, 2.0 * diff + 1.0 + beta);
    rhs.resize(m);
    for (int i = 0; i < m; ++i)
      rhs[i] = beta * V[i] - p.b * std::max(V[i], 0.0) + I[i];
    if (left.type == CableBcType::dirichlet) {
      di[0] += diff;
      rhs[0] += 2.0 * diff * left.value;
    } else {
      di[0] -= diff;
    }
    if (right.type == CableBcType::dirichlet) {
      di[m - 1] += diff;
      rhs[m - 1] += 2.0 * diff * right.value;
    } else {
      di[m - 1] -= diff;
    }
    std::vector<double> Vn;
    thomas(lo, di, up, rhs, Vn);
    double worst = 0.0;
    for (int i = 0; i < m; ++i) worst = std::max(worst, std::fabs(Vn[i] - V[i]));
    V.swap(Vn);
    if (worst < tol) return V;
  }
  throw NumericsError("cable relaxation did not converge");
}

namespace {

inline double decay_length(const CableParams& p, double sign_v) {
  return sign_v > 0.0 ? p.lambda / std::sqrt(1.0 + p.b) : p.lambda;
}

}  // namespace

double RestProfile::eval(double s) const {
  if (crossing < 0.0) {
    double lam = lambda_left;  // single branch shares one decay length
    double den = std::sinh(length / lam);
    return (v_left * std::sinh((length - s) / lam) + v_right * std::sinh(s / lam)) / den;
  }
  if (s <= crossing) {
    return v_left * std::sinh((crossing - s) / lambda_left) / std::sinh(crossing / lambda_left);
  }
  return v_right * std::sinh((s - crossing) / lambda_right) /
         std::sinh((length - crossing) / lambda_right);
}

RestProfile rest_voltage_profile(const CableParams& p, double v_left, double v_right,
                                 double length) {
  RestProfile r;
  r.v_left = v_left;
  r.v_right = v_right;
  r.length = length;
  if (v_left * v_right >= 0.0) {
    // One sign throughout; the decay length follows that sign (the recovery
    // current only engages where V > 0).
    double sgn = (v_left + v_right > 0.0) ? 1.0 : ((v_left + v_right < 0.0) ? -1.0 : 0.0);
    r.lambda_left = r.lambda_right = decay_length(p, sgn);
    r.crossing = -1.0;
    return r;
  }
  double ll = decay_length(p, v_left);
  double lr = decay_length(p, v_right);
  // Crossing point where the two branches meet with a continuous slope.
  auto slope_gap = [&](double sc) {
    return -v_left / (ll * std::sinh(sc / ll)) - v_right / (lr * std::sinh((length - sc) / lr));
  };
  double lo = 1.0e-12 * length, hi = length * (1.0 - 1.0e-12);
  double flo = slope_gap(lo);
  for (int it = 0; it < 200 && hi - lo > 1.0e-13; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = slope_gap(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  r.crossing = 0.5 * (lo + hi);
  r.lambda_left = ll;
  r.lambda_right = lr;
  return r;
}

double activation_sigmoid(double v) {
  static const double gain = std::atanh(0.98);
  return 0.5 * (1.0 + std::tanh(gain * (v - 40.0) / 40.0));
}

}  // namespace octoarm

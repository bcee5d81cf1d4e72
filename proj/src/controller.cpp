#include "octoarm/controller.hpp"

#include <algorithm>
#include <cmath>

#include "octoarm/environment.hpp"

namespace octoarm {

void ControlParams::validate() const {
  if (!(chi >= 0.0) || !std::isfinite(chi)) throw ConfigError("control: gain must be non-negative");
  if (!(eps_frac > 0.0) || !(eps_frac < 1.0))
    throw ConfigError("control: reach tolerance must lie in (0,1)");
}

int closest_point_index(const std::vector<double>& rho) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(rho.size()); ++i)
    if (rho[i] < rho[best]) best = i;
  return best;
}

namespace {

// Curvature field: linear through the interior-node values, clamped at the
// ends, so midpoints reproduce the averaged curvature the muscles see.
inline double kappa_at(const Deformations& d, double ds, int n, double s) {
  if (n < 2 || d.kappa.empty()) return 0.0;
  double u = s / ds;  // node units; kappa[i-1] lives at node i
  if (u <= 1.0) return d.kappa.front();
  if (u >= n - 1.0) return d.kappa.back();
  int i = static_cast<int>(u);
  double f = u - i;
  return (1.0 - f) * d.kappa[i - 1] + f * d.kappa[i];
}

struct PolarRhs {
  double drho, dalpha;
};

inline PolarRhs polar_rhs(const Deformations& d, double ds, int n, double s, double rho,
                          double alpha, bool* degenerate) {
  int e = std::min(static_cast<int>(s / ds), n - 1);
  double n1 = d.nu1[e], n2 = d.nu2[e];
  double sa = std::sin(alpha), ca = std::cos(alpha);
  if (rho < 1.0e-12) {
    *degenerate = true;
    rho = 1.0e-12;
  }
  PolarRhs r;
  r.drho = -(n1 * ca + n2 * sa);
  r.dalpha = -kappa_at(d, ds, n, s) + (n1 * sa - n2 * ca) / rho;
  return r;
}

}  // namespace

PolarField integrate_target_kinematics(const Deformations& d, const RodParameters& p,
                                       Vec2 target, double theta0) {
  int n = p.n_elem;
  double ds = p.ds();
  PolarField f;
  f.rho.resize(n + 1);
  f.alpha.resize(n + 1);
  double rho = norm(target);
  double alpha = (rho > 0.0) ? wrap_angle(std::atan2(target.y, target.x) - theta0) : 0.0;
  if (rho <= 0.0) f.degenerate = true;
  f.rho[0] = rho;
  f.alpha[0] = alpha;
  for (int i = 0; i < n; ++i) {
    double s = i * ds;
    PolarRhs k1 = polar_rhs(d, ds, n, s, rho, alpha, &f.degenerate);
    double rho_m = rho + 0.5 * ds * k1.drho;
    double alpha_m = alpha + 0.5 * ds * k1.dalpha;
    PolarRhs k2 = polar_rhs(d, ds, n, s + 0.5 * ds, rho_m, alpha_m, &f.degenerate);
    rho += ds * k2.drho;
    alpha += ds * k2.dalpha;
    if (rho < 1.0e-12) {
      f.degenerate = true;
      rho = 1.0e-12;
    }
    f.rho[i + 1] = rho;
    f.alpha[i + 1] = alpha;
  }
  return f;
}

PolarField measure_target_polar(const RodState& s, const RodParameters&, Vec2 target) {
  int n = s.n_elem();
  PolarField f;
  f.rho.resize(n + 1);
  f.alpha.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    PolarView pv = distance_bearing(target, s.pos[k], node_angle(s, k));
    if (pv.rho <= 0.0) f.degenerate = true;
    f.rho[k] = pv.rho;
    f.alpha[k] = pv.alpha;
  }
  return f;
}

std::vector<double> measure_midpoint_bearing(const RodState& s, Vec2 target) {
  int n = s.n_elem();
  std::vector<double> alpha(n);
  for (int e = 0; e < n; ++e) {
    Vec2 off = target - element_midpoint(s, e);
    double rho = norm(off);
    alpha[e] = (rho > 0.0) ? wrap_angle(std::atan2(off.y, off.x) - s.theta[e]) : 0.0;
  }
  return alpha;
}

ControlInputs muscle_currents(const std::vector<double>& alpha,
                              const std::vector<double>& s_mid, double s_bar,
                              const ControlParams& cp, bool enable_trans) {
  int n = static_cast<int>(alpha.size());
  ControlInputs in;
  in.top.assign(n, 0.0);
  in.bottom.assign(n, 0.0);
  in.trans.assign(n, 0.0);
  for (int e = 0; e < n; ++e) {
    if (s_mid[e] > s_bar) continue;  // distal of the closest point stays passive
    double sa = std::sin(alpha[e]);
    if (sa >= 0.0) in.top[e] = cp.chi * sa;
    if (sa <= 0.0) in.bottom[e] = -cp.chi * sa;
    if (enable_trans) {
      double ca = std::cos(alpha[e]);
      in.trans[e] = cp.chi * ca * ca;
    }
  }
  return in;
}

EquilibriumResult solve_reach_equilibrium(const RodParameters& rp, const MuscleParams& mp,
                                          const CableParams& cp, const ControlParams& ctrl,
                                          Vec2 target, const EquilibriumOptions& opt) {
  int n = rp.n_elem;
  double ds = rp.ds();
  std::vector<double> s_mid = element_midpoint_s(rp);
  CableBc neu;  // zero-flux both ends while the controller drives the cables

  EquilibriumResult res;
  res.def.nu1.assign(n, 1.0);
  res.def.nu2.assign(n, 0.0);
  res.def.kappa.assign(n - 1, 0.0);
  res.u = Activations::zero(n);

  std::vector<double> alpha_elem(n);
  for (res.iters = 0; res.iters < opt.max_iters; ++res.iters) {
    res.polar = integrate_target_kinematics(res.def, rp, target);
    int ci = closest_point_index(res.polar.rho);
    res.s_bar = ci * ds;
    for (int e = 0; e < n; ++e)
      alpha_elem[e] = 0.5 * (res.polar.alpha[e] + res.polar.alpha[e + 1]);
    res.currents = muscle_currents(alpha_elem, s_mid, res.s_bar, ctrl, opt.enable_trans);

    std::vector<double> vt = solve_cable_static(cp, res.currents.top, ds, neu, neu);
    std::vector<double> vb = solve_cable_static(cp, res.currents.bottom, ds, neu, neu);
    std::vector<double> vx = solve_cable_static(cp, res.currents.trans, ds, neu, neu);
    res.u.top.resize(n);
    res.u.bottom.resize(n);
    res.u.trans.resize(n);
    for (int e = 0; e < n; ++e) {
      res.u.top[e] = activation_sigmoid(vt[e]);
      res.u.bottom[e] = activation_sigmoid(vb[e]);
      res.u.trans[e] = activation_sigmoid(vx[e]);
    }

    ActiveLoads al = muscle_loads(res.def, rp, mp, res.u);
    double worst = 0.0;
    for (int i = 1; i < n; ++i) {
      double tgt = -al.couple_node[i] / (rp.E * rod_moment(rp, i * ds));
      double upd = tgt - res.def.kappa[i - 1];
      worst = std::max(worst, std::fabs(upd));
      res.def.kappa[i - 1] += opt.relax * upd;
    }
    if (opt.mode == RodMode::extensible) {
      for (int e = 0; e < n; ++e) {
        double EA = rp.E * rod_area(rp, s_mid[e]);
        double tgt = 1.0 - al.axial[e] / EA;
        double upd = tgt - res.def.nu1[e];
        worst = std::max(worst, std::fabs(upd));
        res.def.nu1[e] += opt.relax * upd;
      }
    }
    if (worst < opt.tol) {
      res.converged = true;
      break;
    }
  }

  // Force-balance residual at the returned configuration.
  ActiveLoads al = muscle_loads(res.def, rp, mp, res.u);
  double res_couple = 0.0, scale_couple = 0.0, res_axial = 0.0, scale_axial = 0.0;
  for (int i = 1; i < n; ++i) {
    double m = rp.E * rod_moment(rp, i * ds) * res.def.kappa[i - 1] + al.couple_node[i];
    res_couple = std::max(res_couple, std::fabs(m));
    scale_couple = std::max(scale_couple, std::fabs(al.couple_node[i]));
  }
  if (opt.mode == RodMode::extensible) {
    for (int e = 0; e < n; ++e) {
      double f = rp.E * rod_area(rp, s_mid[e]) * (res.def.nu1[e] - 1.0) + al.axial[e];
      res_axial = std::max(res_axial, std::fabs(f));
      scale_axial = std::max(scale_axial, std::fabs(al.axial[e]));
    }
  }
  res.residual = std::max(res_couple, res_axial);
  double rel = 0.0;
  if (scale_couple > 0.0) rel = std::max(rel, res_couple / scale_couple);
  if (scale_axial > 0.0) rel = std::max(rel, res_axial / scale_axial);
  res.residual_rel = rel;
  return res;
}

PursuitTrajectory mc_unicycle_oracle(Vec2 start, double heading, Vec2 target,
                                     double speed, double chi, double dt,
                                     double t_final, double capture_radius) {
  PursuitTrajectory tr;
  tr.dt = dt;
  Vec2 off = target - start;
  double zeta = norm(off);
  double phi = (zeta > 0.0) ? wrap_angle(std::atan2(off.y, off.x) - heading) : 0.0;
  tr.zeta.push_back(zeta);
  tr.phi.push_back(phi);
  int steps = static_cast<int>(std::ceil(t_final / dt));
  for (int k = 0; k < steps; ++k) {
    if (zeta <= capture_radius) {
      tr.captured = true;
      break;
    }
    double omega = chi * std::sin(phi);  // pure pursuit of a fixed point
    double dzeta = -speed * std::cos(phi);
    double dphi = -omega + speed * std::sin(phi) / zeta;
    zeta += dt * dzeta;
    phi += dt * dphi;
    tr.t_end = (k + 1) * dt;
    tr.zeta.push_back(zeta);
    tr.phi.push_back(phi);
  }
  if (zeta <= capture_radius) tr.captured = true;
  return tr;
}

BearingFlow integrate_bearing_flow(double rho0, double alpha0, double chi,
                                   double ds, double s_final, double capture_radius) {
  BearingFlow fl;
  fl.ds = ds;
  double rho = rho0, alpha = alpha0;
  fl.rho.push_back(rho);
  fl.alpha.push_back(alpha);
  int steps = static_cast<int>(std::ceil(s_final / ds));
  for (int k = 0; k < steps; ++k) {
    if (rho <= capture_radius) {
      fl.captured = true;
      break;
    }
    double sa = std::sin(alpha);
    double drho = -std::cos(alpha);
    double dalpha = -chi * sa + sa / rho;
    rho += ds * drho;
    alpha += ds * dalpha;
    fl.s_end = (k + 1) * ds;
    fl.rho.push_back(rho);
    fl.alpha.push_back(alpha);
  }
  if (rho <= capture_radius) fl.captured = true;
  return fl;
}

}  // namespace octoarm

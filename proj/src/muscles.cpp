#include "octoarm/muscles.hpp"

#include <algorithm>
#include <cmath>

namespace octoarm {

void MuscleParams::validate() const {
  if (!(sigma_lm >= 0.0) || !(sigma_tm >= 0.0))
    throw ConfigError("muscle: peak stresses must be non-negative");
  if (area_frac_lm < 0.0 || area_frac_lm > 1.0 || area_frac_tm < 0.0 || area_frac_tm > 1.0)
    throw ConfigError("muscle: area fractions must lie in [0,1]");
  if (!(offset_factor > 0.0)) throw ConfigError("muscle: offset factor must be positive");
}

Activations Activations::zero(int n) {
  Activations u;
  u.top.assign(n, 0.0);
  u.bottom.assign(n, 0.0);
  u.trans.assign(n, 0.0);
  return u;
}

namespace {

inline double fl_cubic(double l) {
  return ((3.06 * l - 13.64) * l + 18.01) * l - 6.44;
}

inline double fl_cubic_prim(double l) {
  // Antiderivative of the raw cubic.
  return (((3.06 / 4.0) * l - 13.64 / 3.0) * l + 18.01 / 2.0) * l * l - 6.44 * l;
}

// Roots of the cubic bracketing where the clamp engages.
struct FlRoots {
  double r1, r2, r3;
  double c_low, c_mid;  // antiderivative plateau values relative to l = 1
  FlRoots() {
    r1 = bisect(0.4, 0.8);
    r2 = bisect(1.4, 1.8);
    r3 = bisect(2.1, 2.5);
    c_low = fl_cubic_prim(r1) - fl_cubic_prim(1.0);
    c_mid = fl_cubic_prim(r2) - fl_cubic_prim(1.0);
  }
  static double bisect(double lo, double hi) {
    double flo = fl_cubic(lo);
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      double fm = fl_cubic(mid);
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
};

const FlRoots& fl_roots() {
  static const FlRoots r;
  return r;
}

}  // namespace

double force_length(double l) {
  return std::max(fl_cubic(l), 0.0);
}

double force_length_antiderivative(double l) {
  const FlRoots& r = fl_roots();
  if (l <= r.r1) return r.c_low;
  if (l <= r.r2) return fl_cubic_prim(l) - fl_cubic_prim(1.0);
  if (l <= r.r3) return r.c_mid;
  return r.c_mid + fl_cubic_prim(l) - fl_cubic_prim(r.r3);
}

namespace {

// Curvature averaged to the element midpoint; end elements see their single
// interior node.
inline double kappa_mid(const Deformations& d, int e, int n) {
  if (e == 0) return d.kappa.front();
  if (e == n - 1) return d.kappa.back();
  return 0.5 * (d.kappa[e - 1] + d.kappa[e]);
}

}  // namespace

MuscleLengths muscle_lengths(const Deformations& d, const RodParameters& rp,
                             const MuscleParams& mp) {
  int n = rp.n_elem;
  double ds = rp.ds();
  MuscleLengths ml;
  ml.top.resize(n);
  ml.bottom.resize(n);
  ml.trans.resize(n);
  for (int e = 0; e < n; ++e) {
    double x = mp.offset_factor * rod_radius(rp, (e + 0.5) * ds);
    double km = kappa_mid(d, e, n);
    ml.top[e] = d.nu1[e] - x * km;
    ml.bottom[e] = d.nu1[e] + x * km;
    ml.trans[e] = mp.tm_reciprocal ? 1.0 / d.nu1[e] : 2.0 - d.nu1[e];
  }
  return ml;
}

MuscleTensions muscle_tensions(const Deformations& d, const RodParameters& rp,
                               const MuscleParams& mp, const Activations& u) {
  int n = rp.n_elem;
  double ds = rp.ds();
  MuscleLengths ml = muscle_lengths(d, rp, mp);
  MuscleTensions t;
  t.top.resize(n);
  t.bottom.resize(n);
  t.trans.resize(n);
  for (int e = 0; e < n; ++e) {
    double A = rod_area(rp, (e + 0.5) * ds);
    t.top[e] = u.top[e] * mp.sigma_lm * mp.area_frac_lm * A * force_length(ml.top[e]);
    t.bottom[e] = u.bottom[e] * mp.sigma_lm * mp.area_frac_lm * A * force_length(ml.bottom[e]);
    t.trans[e] = u.trans[e] * mp.sigma_tm * mp.area_frac_tm * A * force_length(ml.trans[e]);
  }
  return t;
}

ActiveLoads muscle_loads(const Deformations& d, const RodParameters& rp,
                         const MuscleParams& mp, const Activations& u) {
  int n = rp.n_elem;
  double ds = rp.ds();
  MuscleTensions t = muscle_tensions(d, rp, mp, u);
  ActiveLoads loads;
  loads.axial.resize(n);
  loads.couple_elem.resize(n);
  loads.couple_node.assign(n + 1, 0.0);
  for (int e = 0; e < n; ++e) {
    double x = mp.offset_factor * rod_radius(rp, (e + 0.5) * ds);
    double dtm = mp.tm_reciprocal ? 1.0 / (d.nu1[e] * d.nu1[e]) : 1.0;
    // Longitudinal tension is tensile along +a; the transverse group pushes
    // the tip out, entering the axial balance with the opposite sign.
    loads.axial[e] = t.top[e] + t.bottom[e] - dtm * t.trans[e];
    loads.couple_elem[e] = x * (t.bottom[e] - t.top[e]);
  }
  // Carry the couples to the interior nodes with the weights of the curvature
  // average, so the node couple is the exact derivative of the muscle
  // potential with respect to the node curvature (per unit ds).
  for (int e = 0; e < n; ++e) {
    if (e == 0) {
      loads.couple_node[1] += loads.couple_elem[e];
    } else if (e == n - 1) {
      loads.couple_node[n - 1] += loads.couple_elem[e];
    } else {
      loads.couple_node[e] += 0.5 * loads.couple_elem[e];
      loads.couple_node[e + 1] += 0.5 * loads.couple_elem[e];
    }
  }
  loads.couple_node[0] = 0.0;
  loads.couple_node[n] = 0.0;
  return loads;
}

double muscle_potential(const Deformations& d, const RodParameters& rp,
                        const MuscleParams& mp, const Activations& u) {
  int n = rp.n_elem;
  double ds = rp.ds();
  MuscleLengths ml = muscle_lengths(d, rp, mp);
  double en = 0.0;
  for (int e = 0; e < n; ++e) {
    double A = rod_area(rp, (e + 0.5) * ds);
    double lm = mp.sigma_lm * mp.area_frac_lm * A;
    double tm = mp.sigma_tm * mp.area_frac_tm * A;
    // The axial and couple loads are the gradient of this sum; the transverse
    // group picks up its sign through d(trans length)/d(nu1) = -1.
    double well = u.top[e] * lm * force_length_antiderivative(ml.top[e]) +
                  u.bottom[e] * lm * force_length_antiderivative(ml.bottom[e]) +
                  u.trans[e] * tm * force_length_antiderivative(ml.trans[e]);
    en += well * ds;
  }
  return en;
}

double total_energy(const RodState& s, const RodParameters& rp,
                    const MuscleParams& mp, const Activations& u, RodMode mode) {
  Deformations d = compute_deformations(s, rp);
  return kinetic_energy(s, rp, mode == RodMode::extensible) + elastic_energy(d, rp) +
         muscle_potential(d, rp, mp, u);
}

namespace {

struct InternalLoads {
  std::vector<double> n1, n2;  // per element
  std::vector<double> m;       // per node, [0] mirrored from [1], [n] = 0
};

// Remove the edge-stretch rate from the velocities: solve for edge impulses
// lambda with (v + M^{-1} J^T lambda) . J = 0 and apply them.  The correction
// is an M-orthogonal projection onto the constraint tangent space, so kinetic
// energy never increases.  Without it the position projection leaves a
// growing normal velocity component that pumps energy into node-scale
// transverse oscillation.  Nodes 0 and 1 are clamped (zero velocity), so the
// first edge carries no multiplier.
void project_velocities(RodState& s, const RodParameters& rp,
                        const std::vector<double>& mass) {
  int n = s.n_elem();
  if (n < 2) return;
  int m = n - 1;  // multipliers for edges 1..n-1
  static thread_local std::vector<double> diag, lower, upper, rhs;
  static thread_local std::vector<Vec2> tang;
  diag.assign(m, 0.0);
  lower.assign(m, 0.0);
  upper.assign(m, 0.0);
  rhs.assign(m, 0.0);
  tang.resize(n);
  for (int e = 0; e < n; ++e) tang[e] = frame_a(s.theta[e]);
  auto winv = [&](int k) { return k < 2 ? 0.0 : 1.0 / mass[k]; };
  for (int j = 0; j < m; ++j) {
    int e = j + 1;
    diag[j] = winv(e) + winv(e + 1);
    if (j > 0) lower[j] = -winv(e) * dot(tang[e - 1], tang[e]);
    if (j + 1 < m) upper[j] = -winv(e + 1) * dot(tang[e], tang[e + 1]);
    rhs[j] = -dot(s.vel[e + 1] - s.vel[e], tang[e]);
  }
  for (int j = 1; j < m; ++j) {  // Thomas elimination, system is SPD
    double w = lower[j] / diag[j - 1];
    diag[j] -= w * upper[j - 1];
    rhs[j] -= w * rhs[j - 1];
  }
  for (int j = m - 1; j >= 0; --j) {
    double num = rhs[j] - (j + 1 < m ? upper[j] * rhs[j + 1] : 0.0);
    rhs[j] = num / diag[j];  // rhs becomes lambda
  }
  for (int j = 0; j < m; ++j) {
    int e = j + 1;
    double lam = rhs[j];
    s.vel[e] -= (lam * winv(e)) * tang[e];
    s.vel[e + 1] += (lam * winv(e + 1)) * tang[e];
  }
}

InternalLoads assemble_internal(const Deformations& d, const RodParameters& rp,
                                const MuscleParams& mp, const Activations& u, RodMode mode) {
  int n = rp.n_elem;
  double ds = rp.ds();
  ElementStress ps = passive_stress(d, rp);
  ActiveLoads al = muscle_loads(d, rp, mp, u);
  InternalLoads out;
  out.n1.resize(n);
  out.n2.resize(n);
  out.m.assign(n + 1, 0.0);
  for (int i = 1; i < n; ++i) out.m[i] = ps.m[i - 1] + al.couple_node[i];
  out.m[0] = out.m[1];
  out.m[n] = 0.0;
  for (int e = 0; e < n; ++e) {
    out.n1[e] = ps.n1[e] + al.axial[e];
    if (mode == RodMode::constrained) {
      // Quasi-static couple balance hands the bending moment to the
      // positions as a transverse stress.
      out.n2[e] = -(out.m[e + 1] - out.m[e]) / ds;
    } else {
      out.n2[e] = ps.n2[e];
    }
  }
  return out;
}

}  // namespace

void step_arm(RodState& s, const RodParameters& rp, const MuscleParams& mp,
              const Activations& u, const StepOptions& opt) {
  int n = s.n_elem();
  double ds = rp.ds();
  double dt = opt.dt;
  bool constrained = (opt.mode == RodMode::constrained);

  static thread_local std::vector<double> masses_cache;
  static thread_local std::vector<double> inertia_cache;
  static thread_local int cache_n = -1;
  static thread_local double cache_L = 0.0, cache_rb = 0.0, cache_rt = 0.0, cache_rho = 0.0;
  if (cache_n != n || cache_L != rp.L || cache_rb != rp.r_base || cache_rt != rp.r_tip ||
      cache_rho != rp.rho) {
    masses_cache = node_masses(rp);
    inertia_cache = element_inertia(rp);
    cache_n = n;
    cache_L = rp.L;
    cache_rb = rp.r_base;
    cache_rt = rp.r_tip;
    cache_rho = rp.rho;
  }
  const std::vector<double>& mass = masses_cache;
  const std::vector<double>& J = inertia_cache;

  std::vector<double> theta_before;
  if (constrained) theta_before = s.theta;

  // Half drift.
  for (int k = 0; k <= n; ++k) s.pos[k] += (0.5 * dt) * s.vel[k];
  if (constrained) {
    project_positions(s, rp);
  } else {
    for (int e = 1; e < n; ++e) s.theta[e] += 0.5 * dt * s.omega[e];
  }

  // Kick at the midpoint configuration.
  Deformations d = compute_deformations(s, rp);
  InternalLoads in = assemble_internal(d, rp, mp, u, opt.mode);
  std::vector<Vec2> S(n);
  for (int e = 0; e < n; ++e)
    S[e] = in.n1[e] * frame_a(s.theta[e]) + in.n2[e] * frame_b(s.theta[e]);

  int first_free = constrained ? 2 : 1;
  for (int k = first_free; k <= n; ++k) {
    Vec2 F = (k < n) ? (S[k] - S[k - 1]) : (Vec2() - S[n - 1]);
    double w = (k == n) ? 0.5 * ds : ds;  // station length carried by the node
    F += (-rp.xi * w) * s.vel[k];
    if (opt.drag) {
      double sk = std::min(k * ds, rp.L);
      F += w * drag_force_per_length(rp, rod_radius(rp, sk), node_angle(s, k), s.vel[k]);
    }
    s.vel[k] += (dt / mass[k]) * F;
  }
  if (!constrained) {
    // The angular drag rate xi/(rho I) runs to ~1e7/s near the thin tip, far
    // beyond the explicit stability limit, so that one linear term is folded
    // in implicitly; the elastic torques stay in the Verlet kick.
    for (int e = 1; e < n; ++e) {
      double T = (in.m[e + 1] - in.m[e]) +
                 ds * (d.nu1[e] * in.n2[e] - d.nu2[e] * in.n1[e]);
      s.omega[e] = (s.omega[e] + dt * T / J[e]) / (1.0 + dt * rp.xi * ds / J[e]);
    }
  }

  // Half drift.
  for (int k = 0; k <= n; ++k) s.pos[k] += (0.5 * dt) * s.vel[k];
  if (constrained) {
    project_positions(s, rp);
    project_velocities(s, rp, mass);
    for (int e = 0; e < n; ++e) s.omega[e] = (s.theta[e] - theta_before[e]) / dt;
  } else {
    for (int e = 1; e < n; ++e) s.theta[e] += 0.5 * dt * s.omega[e];
  }

  s.time += dt;
  if (!finite(s.pos[n]) || !finite(s.vel[n]))
    throw NumericsError("arm state left the validity envelope");
}

Deformations solve_static_deformations(const RodParameters& rp, const MuscleParams& mp,
                                       const Activations& u, RodMode mode,
                                       double relax, double tol, int max_iters) {
  int n = rp.n_elem;
  double ds = rp.ds();
  Deformations d;
  d.nu1.assign(n, 1.0);
  d.nu2.assign(n, 0.0);
  d.kappa.assign(n - 1, 0.0);
  for (int it = 0; it < max_iters; ++it) {
    ActiveLoads al = muscle_loads(d, rp, mp, u);
    double worst = 0.0;
    for (int i = 1; i < n; ++i) {
      double target = -al.couple_node[i] / (rp.E * rod_moment(rp, i * ds));
      double upd = target - d.kappa[i - 1];
      worst = std::max(worst, std::fabs(upd));
      d.kappa[i - 1] += relax * upd;
    }
    if (mode == RodMode::extensible) {
      for (int e = 0; e < n; ++e) {
        double EA = rp.E * rod_area(rp, (e + 0.5) * ds);
        double target = 1.0 - al.axial[e] / EA;
        double upd = target - d.nu1[e];
        worst = std::max(worst, std::fabs(upd));
        d.nu1[e] += relax * upd;
      }
    }
    if (worst < tol) return d;
  }
  throw NumericsError("static deformation solve did not converge");
}

}  // namespace octoarm

#include "octoarm/rod.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace octoarm {

void RodParameters::validate() const {
  if (!(L > 0.0)) throw ConfigError("rod: length must be positive");
  if (!(r_base > 0.0) || !(r_tip > 0.0)) throw ConfigError("rod: radii must be positive");
  if (!(rho > 0.0)) throw ConfigError("rod: density must be positive");
  if (!(E > 0.0) || !(G > 0.0)) throw ConfigError("rod: moduli must be positive");
  if (xi < 0.0) throw ConfigError("rod: damping must be non-negative");
  if (rho_water < 0.0 || xi_tan < 0.0 || xi_per < 0.0)
    throw ConfigError("rod: drag parameters must be non-negative");
  if (n_elem < 4) throw ConfigError("rod: need at least 4 elements");
}

double rod_radius(const RodParameters& p, double s) {
  constexpr double slack = 1.0e-9;
  if (s < -slack * p.L || s > (1.0 + slack) * p.L)
    throw std::domain_error("rod_radius: arc length outside [0, L]");
  s = std::min(std::max(s, 0.0), p.L);
  return (s / p.L) * p.r_tip + ((p.L - s) / p.L) * p.r_base;
}

double rod_area(const RodParameters& p, double s) {
  double r = rod_radius(p, s);
  return kPi * r * r;
}

double rod_moment(const RodParameters& p, double s) {
  double a = rod_area(p, s);
  return a * a / (4.0 * kPi);
}

RodState make_straight_state(const RodParameters& p) {
  RodState s;
  int n = p.n_elem;
  double ds = p.ds();
  s.pos.resize(n + 1);
  s.vel.assign(n + 1, Vec2());
  s.theta.assign(n, 0.0);
  s.omega.assign(n, 0.0);
  for (int k = 0; k <= n; ++k) s.pos[k] = Vec2(k * ds, 0.0);
  return s;
}

RodState make_state_from_deformations(const RodParameters& p, const Deformations& d) {
  int n = p.n_elem;
  double ds = p.ds();
  RodState s;
  s.pos.resize(n + 1);
  s.vel.assign(n + 1, Vec2());
  s.theta.assign(n, 0.0);
  s.omega.assign(n, 0.0);
  s.theta[0] = 0.0;
  for (int e = 1; e < n; ++e) s.theta[e] = s.theta[e - 1] + d.kappa[e - 1] * ds;
  s.pos[0] = Vec2(0.0, 0.0);
  for (int e = 0; e < n; ++e) {
    Vec2 edge = d.nu1[e] * frame_a(s.theta[e]) + d.nu2[e] * frame_b(s.theta[e]);
    s.pos[e + 1] = s.pos[e] + ds * edge;
  }
  return s;
}

Deformations compute_deformations(const RodState& s, const RodParameters& p) {
  int n = s.n_elem();
  double ds = p.ds();
  Deformations d;
  d.nu1.resize(n);
  d.nu2.resize(n);
  d.kappa.resize(n - 1);
  for (int e = 0; e < n; ++e) {
    Vec2 edge = (1.0 / ds) * (s.pos[e + 1] - s.pos[e]);
    d.nu1[e] = dot(edge, frame_a(s.theta[e]));
    d.nu2[e] = dot(edge, frame_b(s.theta[e]));
  }
  for (int i = 1; i < n; ++i) d.kappa[i - 1] = (s.theta[i] - s.theta[i - 1]) / ds;
  return d;
}

Vec2 element_midpoint(const RodState& s, int e) {
  return 0.5 * (s.pos[e] + s.pos[e + 1]);
}

double node_angle(const RodState& s, int k) {
  int n = s.n_elem();
  if (k <= 0) return s.theta[0];
  if (k >= n) return s.theta[n - 1];
  return 0.5 * (s.theta[k - 1] + s.theta[k]);
}

std::vector<double> element_midpoint_s(const RodParameters& p) {
  std::vector<double> sm(p.n_elem);
  for (int e = 0; e < p.n_elem; ++e) sm[e] = (e + 0.5) * p.ds();
  return sm;
}

ElementStress passive_stress(const Deformations& d, const RodParameters& p) {
  int n = p.n_elem;
  double ds = p.ds();
  ElementStress st;
  st.n1.resize(n);
  st.n2.resize(n);
  st.m.resize(n - 1);
  for (int e = 0; e < n; ++e) {
    double smid = (e + 0.5) * ds;
    double A = rod_area(p, smid);
    st.n1[e] = p.E * A * (d.nu1[e] - 1.0);
    st.n2[e] = p.G * A * d.nu2[e];
  }
  for (int i = 1; i < n; ++i) st.m[i - 1] = p.E * rod_moment(p, i * ds) * d.kappa[i - 1];
  return st;
}

Vec2 drag_force_per_length(const RodParameters& p, double r, double theta, const Vec2& vel) {
  Vec2 a = frame_a(theta), b = frame_b(theta);
  double v1 = dot(vel, a);
  double v2 = dot(vel, b);
  double ft = p.xi_tan * (2.0 * kPi * r) * v1 * std::fabs(v1);
  double fp = p.xi_per * (2.0 * r) * v2 * std::fabs(v2);
  return -0.5 * p.rho_water * (ft * a + fp * b);
}

std::vector<double> node_masses(const RodParameters& p) {
  int n = p.n_elem;
  double ds = p.ds();
  std::vector<double> m(n + 1, 0.0);
  for (int e = 0; e < n; ++e) {
    double me = p.rho * rod_area(p, (e + 0.5) * ds) * ds;
    m[e] += 0.5 * me;
    m[e + 1] += 0.5 * me;
  }
  return m;
}

std::vector<double> element_inertia(const RodParameters& p) {
  int n = p.n_elem;
  double ds = p.ds();
  std::vector<double> J(n);
  for (int e = 0; e < n; ++e) J[e] = p.rho * rod_moment(p, (e + 0.5) * ds) * ds;
  return J;
}

double kinetic_energy(const RodState& s, const RodParameters& p, bool include_rotary) {
  std::vector<double> m = node_masses(p);
  double ke = 0.0;
  for (std::size_t k = 0; k < s.pos.size(); ++k) ke += 0.5 * m[k] * norm2(s.vel[k]);
  if (include_rotary) {
    std::vector<double> J = element_inertia(p);
    for (int e = 0; e < s.n_elem(); ++e) ke += 0.5 * J[e] * s.omega[e] * s.omega[e];
  }
  return ke;
}

double elastic_energy(const Deformations& d, const RodParameters& p) {
  int n = p.n_elem;
  double ds = p.ds();
  double en = 0.0;
  for (int e = 0; e < n; ++e) {
    double smid = (e + 0.5) * ds;
    double A = rod_area(p, smid);
    double e1 = d.nu1[e] - 1.0;
    en += 0.5 * (p.E * A * e1 * e1 + p.G * A * d.nu2[e] * d.nu2[e]) * ds;
  }
  for (int i = 1; i < n; ++i) {
    double I = rod_moment(p, i * ds);
    en += 0.5 * p.E * I * d.kappa[i - 1] * d.kappa[i - 1] * ds;
  }
  return en;
}

void project_positions(RodState& s, const RodParameters& p) {
  int n = s.n_elem();
  double ds = p.ds();
  s.pos[0] = Vec2(0.0, 0.0);
  s.pos[1] = Vec2(ds, 0.0);
  s.theta[0] = 0.0;
  for (int e = 1; e < n; ++e) {
    Vec2 dir = s.pos[e + 1] - s.pos[e];
    double len = norm(dir);
    if (!(len > 0.0)) throw NumericsError("projection hit a zero-length edge");
    s.pos[e + 1] = s.pos[e] + (ds / len) * dir;
    double raw = std::atan2(dir.y, dir.x);
    s.theta[e] = s.theta[e - 1] + wrap_angle(raw - s.theta[e - 1]);
  }
}

}  // namespace octoarm

#include "octoarm/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace octoarm {

void EnvironmentParams::validate() const {
  if (!(mu > 0.0)) throw ConfigError("environment: mu must be positive");
  if (!(diffusivity > 0.0)) throw ConfigError("environment: diffusivity must be positive");
}

double steady_concentration(double rho, double L, double mu) {
  if (!(rho > 0.0)) throw std::domain_error("steady_concentration: distance must be positive");
  return -std::log(rho / L) / mu;
}

double concentration_to_distance(double c, double L, double mu) {
  return L * std::exp(-mu * c);
}

PolarView distance_bearing(const Vec2& target, const Vec2& position, double theta) {
  PolarView pv;
  Vec2 off = target - position;
  pv.rho = norm(off);
  pv.alpha = (pv.rho > 0.0) ? wrap_angle(std::atan2(off.y, off.x) - theta) : 0.0;
  return pv;
}

DiffusionField::DiffusionField(Vec2 lo, Vec2 hi, int nx, int ny, const Vec2& source,
                               double L, const EnvironmentParams& params)
    : lo_(lo), hi_(hi), source_(source), nx_(nx), ny_(ny), L_(L), params_(params) {
  params_.validate();
  if (nx_ < 4 || ny_ < 4) throw ConfigError("diffusion grid needs at least 4 cells per side");
  if (!(hi_.x > lo_.x) || !(hi_.y > lo_.y)) throw ConfigError("diffusion grid has empty extent");
  if (!(L_ > 0.0)) throw ConfigError("diffusion grid reference length must be positive");
  hx_ = (hi_.x - lo_.x) / nx_;
  hy_ = (hi_.y - lo_.y) / ny_;
  src_i_ = static_cast<int>(std::floor((source_.x - lo_.x) / hx_));
  src_j_ = static_cast<int>(std::floor((source_.y - lo_.y) / hy_));
  if (src_i_ < 1 || src_i_ > nx_ - 2 || src_j_ < 1 || src_j_ > ny_ - 2)
    throw ConfigError("diffusion source must sit strictly inside the grid");
  c_.assign(static_cast<std::size_t>(nx_) * ny_, 0.0);
  scratch_ = c_;
  for (int j = 0; j < ny_; ++j)
    for (int i = 0; i < nx_; ++i)
      if (pinned(i, j)) c_[idx(i, j)] = analytic(cell_center(i, j));
}

bool DiffusionField::pinned(int i, int j) const {
  return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1;
}

Vec2 DiffusionField::cell_center(int i, int j) const {
  return Vec2(lo_.x + (i + 0.5) * hx_, lo_.y + (j + 0.5) * hy_);
}

double DiffusionField::analytic(const Vec2& p) const {
  return steady_concentration(norm(p - source_), L_, params_.mu);
}

double DiffusionField::max_stable_dt() const {
  double D = params_.diffusivity;
  return 1.0 / (2.0 * D * (1.0 / (hx_ * hx_) + 1.0 / (hy_ * hy_)));
}

double DiffusionField::deposit_rate() const {
  return 2.0 * kPi * params_.diffusivity / params_.mu / (hx_ * hy_);
}

void DiffusionField::step(double dt) {
  if (dt > max_stable_dt() * (1.0 + 1.0e-12))
    throw ConfigError("diffusion step exceeds the explicit stability limit");
  double D = params_.diffusivity;
  double cx = D / (hx_ * hx_), cy = D / (hy_ * hy_);
  scratch_ = c_;
  for (int j = 1; j < ny_ - 1; ++j) {
    for (int i = 1; i < nx_ - 1; ++i) {
      double cc = scratch_[idx(i, j)];
      double lap = cx * (scratch_[idx(i - 1, j)] - 2.0 * cc + scratch_[idx(i + 1, j)]) +
                   cy * (scratch_[idx(i, j - 1)] - 2.0 * cc + scratch_[idx(i, j + 1)]);
      c_[idx(i, j)] = cc + dt * lap;
    }
  }
  c_[idx(src_i_, src_j_)] += dt * deposit_rate();
}

int DiffusionField::run_to_steady(double dt, double tol, int max_steps) {
  for (int step_no = 1; step_no <= max_steps; ++step_no) {
    std::vector<double> before = c_;
    step(dt);
    double worst = 0.0;
    for (int j = 1; j < ny_ - 1; ++j)
      for (int i = 1; i < nx_ - 1; ++i)
        worst = std::max(worst, std::fabs(c_[idx(i, j)] - before[idx(i, j)]));
    if (worst < tol) return step_no;
  }
  return max_steps;
}

double DiffusionField::sample(const Vec2& p) const {
  // Bilinear between cell centers, clamped to the span of centers.
  double u = (p.x - lo_.x) / hx_ - 0.5;
  double v = (p.y - lo_.y) / hy_ - 0.5;
  bool oob = u < 0.0 || v < 0.0 || u > nx_ - 1.0 || v > ny_ - 1.0;
  if (oob) ++oob_samples_;
  u = std::min(std::max(u, 0.0), static_cast<double>(nx_ - 1));
  v = std::min(std::max(v, 0.0), static_cast<double>(ny_ - 1));
  int i0 = std::min(static_cast<int>(u), nx_ - 2);
  int j0 = std::min(static_cast<int>(v), ny_ - 2);
  double fu = u - i0, fv = v - j0;
  double c00 = c_[idx(i0, j0)], c10 = c_[idx(i0 + 1, j0)];
  double c01 = c_[idx(i0, j0 + 1)], c11 = c_[idx(i0 + 1, j0 + 1)];
  return (1.0 - fu) * (1.0 - fv) * c00 + fu * (1.0 - fv) * c10 +
         (1.0 - fu) * fv * c01 + fu * fv * c11;
}

double DiffusionField::interior_mass() const {
  double mass = 0.0;
  for (int j = 1; j < ny_ - 1; ++j)
    for (int i = 1; i < nx_ - 1; ++i) mass += c_[idx(i, j)];
  return mass * hx_ * hy_;
}

double DiffusionField::boundary_influx() const {
  // Interior-interior differences cancel in the mass budget; only faces
  // against the pinned ring survive.
  double D = params_.diffusivity;
  double fx = D * hy_ / hx_, fy = D * hx_ / hy_;
  double flux = 0.0;
  for (int j = 1; j < ny_ - 1; ++j) {
    for (int i = 1; i < nx_ - 1; ++i) {
      double cc = c_[idx(i, j)];
      if (pinned(i - 1, j)) flux += fx * (c_[idx(i - 1, j)] - cc);
      if (pinned(i + 1, j)) flux += fx * (c_[idx(i + 1, j)] - cc);
      if (pinned(i, j - 1)) flux += fy * (c_[idx(i, j - 1)] - cc);
      if (pinned(i, j + 1)) flux += fy * (c_[idx(i, j + 1)] - cc);
    }
  }
  return flux;
}

}  // namespace octoarm

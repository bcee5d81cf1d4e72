#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace octoarm {

inline constexpr double kPi = 3.14159265358979323846;

// Bad user input: malformed config files, out-of-range parameters.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simulation left its validity envelope: NaN/Inf state, non-convergence.
struct NumericsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double a) { x *= a; y *= a; return *this; }
};

inline Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
inline Vec2 operator*(double s, Vec2 a) { return a *= s; }
inline Vec2 operator*(Vec2 a, double s) { return a *= s; }
inline Vec2 operator-(const Vec2& a) { return Vec2(-a.x, -a.y); }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm2(const Vec2& a) { return dot(a, a); }
inline double norm(const Vec2& a) { return std::sqrt(norm2(a)); }

// Angle of the unit vector at `theta` plus 90 degrees; (a, b) form the local frame.
inline Vec2 frame_a(double theta) { return Vec2(std::cos(theta), std::sin(theta)); }
inline Vec2 frame_b(double theta) { return Vec2(-std::sin(theta), std::cos(theta)); }

// Wrap to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

inline bool finite(double v) { return std::isfinite(v); }
inline bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace octoarm

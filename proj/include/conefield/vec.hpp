#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <string>

#include "conefield/error.hpp"

namespace conefield {

/// Tangent vector (or point) in dimension 2 or 3.
struct Vec {
  int dim = 2;
  std::array<double, 3> x{0.0, 0.0, 0.0};

  Vec() = default;
  Vec(double a, double b) : dim(2), x{a, b, 0.0} {}
  Vec(double a, double b, double c) : dim(3), x{a, b, c} {}

  static Vec zero(int dim) {
    Vec v;
    v.dim = dim;
    return v;
  }
  static Vec basis(int dim, int axis) {
    Vec v = zero(dim);
    v.x[axis] = 1.0;
    return v;
  }

  double operator[](int i) const { return x[i]; }
  double& operator[](int i) { return x[i]; }

  Vec operator+(const Vec& o) const { return combine(o, 1.0); }
  Vec operator-(const Vec& o) const { return combine(o, -1.0); }
  Vec operator-() const { return *this * -1.0; }
  Vec operator*(double s) const {
    Vec r = *this;
    for (int i = 0; i < dim; ++i) r.x[i] *= s;
    return r;
  }
  Vec operator/(double s) const { return *this * (1.0 / s); }
  Vec& operator+=(const Vec& o) { return *this = *this + o; }

  bool operator==(const Vec& o) const = default;

 private:
  Vec combine(const Vec& o, double s) const {
    if (o.dim != dim) throw Error(ErrorCode::DimensionMismatch, "vector dimensions differ");
    Vec r = *this;
    for (int i = 0; i < dim; ++i) r.x[i] += s * o.x[i];
    return r;
  }
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

inline double dot(const Vec& a, const Vec& b) {
  if (a.dim != b.dim) throw Error(ErrorCode::DimensionMismatch, "vector dimensions differ");
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) s += a.x[i] * b.x[i];
  return s;
}

inline double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

inline Vec normalized(const Vec& v) { return v / norm(v); }

/// z-component of the planar cross product.
inline double cross2(const Vec& a, const Vec& b) { return a.x[0] * b.x[1] - a.x[1] * b.x[0]; }

inline Vec cross3(const Vec& a, const Vec& b) {
  return Vec(a.x[1] * b.x[2] - a.x[2] * b.x[1], a.x[2] * b.x[0] - a.x[0] * b.x[2],
             a.x[0] * b.x[1] - a.x[1] * b.x[0]);
}

inline Vec rotate2(const Vec& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Vec(c * v.x[0] - s * v.x[1], s * v.x[0] + c * v.x[1]);
}

inline bool is_finite(const Vec& v) {
  for (int i = 0; i < v.dim; ++i)
    if (!std::isfinite(v.x[i])) return false;
  return true;
}

inline std::string to_string(const Vec& v) {
  std::string s = "(";
  for (int i = 0; i < v.dim; ++i) {
    if (i) s += ", ";
    s += std::to_string(v.x[i]);
  }
  return s + ")";
}

}  // namespace conefield

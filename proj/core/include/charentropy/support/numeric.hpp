#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace charentropy {

// Fixed coordinate order on the total space: (x, t, y). The base is (x, t).
inline constexpr int kAxisX = 0;
inline constexpr int kAxisT = 1;
inline constexpr int kAxisY = 2;

inline constexpr double kDefaultFdStep = 1e-5;
// Step for second-difference stencils; chosen near the double-precision
// optimum eps^(1/4) so second derivatives are not roundoff-dominated.
inline constexpr double kSecondFdStep = 4e-4;

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericsError : std::runtime_error {
  explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

struct Box {
  int dim = 3;
  std::array<double, 3> lo{{0, 0, 0}};
  std::array<double, 3> hi{{0, 0, 0}};

  bool contains(const double* p, double margin = 0.0) const {
    for (int i = 0; i < dim; ++i)
      if (!(p[i] >= lo[i] + margin && p[i] <= hi[i] - margin)) return false;
    return true;
  }
  bool empty() const {
    for (int i = 0; i < dim; ++i)
      if (!(hi[i] > lo[i])) return true;
    return false;
  }
  double extent(int axis) const { return hi[axis] - lo[axis]; }
  double diameter() const {
    double s = 0;
    for (int i = 0; i < dim; ++i) s += extent(i) * extent(i);
    return std::sqrt(s);
  }
  Vec3 center() const {
    Vec3 c{};
    for (int i = 0; i < dim; ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return c;
  }
  Box shrunk(double factor) const {
    Box b = *this;
    for (int i = 0; i < dim; ++i) {
      const double c = 0.5 * (lo[i] + hi[i]), h = 0.5 * extent(i) * factor;
      b.lo[i] = c - h;
      b.hi[i] = c + h;
    }
    return b;
  }
};

inline Box make_box2(double x0, double x1, double t0, double t1) {
  Box b;
  b.dim = 2;
  b.lo = {x0, t0, 0};
  b.hi = {x1, t1, 0};
  return b;
}

inline Box make_box3(double x0, double x1, double t0, double t1, double y0, double y1) {
  Box b;
  b.dim = 3;
  b.lo = {x0, t0, y0};
  b.hi = {x1, t1, y1};
  return b;
}

// Scalar function on 2- or 3-space with optional analytic gradient.
struct ScalarField {
  std::function<double(const double*)> value;
  std::function<void(const double*, double*)> gradient;  // optional
  double fd_step = kDefaultFdStep;

  double operator()(const double* p) const { return value(p); }

  void eval_gradient(const double* p, int dim, double* out) const {
    if (gradient) {
      gradient(p, out);
      return;
    }
    double q[3];
    for (int i = 0; i < dim; ++i) q[i] = p[i];
    for (int i = 0; i < dim; ++i) {
      const double h = fd_step;
      q[i] = p[i] + h;
      const double fp = value(q);
      q[i] = p[i] - h;
      const double fm = value(q);
      q[i] = p[i];
      out[i] = (fp - fm) / (2 * h);
    }
  }
};

inline ScalarField constant_field(double c) {
  ScalarField f;
  f.value = [c](const double*) { return c; };
  f.gradient = [](const double*, double* g) { g[0] = g[1] = g[2] = 0.0; };
  return f;
}

inline double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

inline double sq(double v) { return v * v; }

}  // namespace charentropy

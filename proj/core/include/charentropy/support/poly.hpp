#pragma once

#include <cmath>
#include <vector>

#include "charentropy/support/numeric.hpp"

namespace charentropy {

// Polynomial in (x, t, y): sum of monomials c * x^px * t^pt * y^py.
// Exact derivatives keep the jets of polynomial flux models analytic.
struct Poly3 {
  struct Term {
    double c;
    int px, pt, py;
  };
  std::vector<Term> terms;

  Poly3() = default;
  Poly3(std::initializer_list<Term> ts) : terms(ts) {}

  static Poly3 constant(double c) {
    Poly3 p;
    if (c != 0.0) p.terms.push_back({c, 0, 0, 0});
    return p;
  }

  double eval(double x, double t, double y) const {
    double s = 0;
    for (const auto& m : terms)
      s += m.c * ipow(x, m.px) * ipow(t, m.pt) * ipow(y, m.py);
    return s;
  }
  double eval(const double* p) const { return eval(p[0], p[1], p[2]); }

  Poly3 derivative(int axis) const {
    Poly3 d;
    for (const auto& m : terms) {
      Term t = m;
      int* e = axis == 0 ? &t.px : (axis == 1 ? &t.pt : &t.py);
      if (*e == 0) continue;
      t.c *= *e;
      *e -= 1;
      d.terms.push_back(t);
    }
    return d;
  }

  Poly3 operator+(const Poly3& o) const {
    Poly3 r = *this;
    r.terms.insert(r.terms.end(), o.terms.begin(), o.terms.end());
    return r;
  }
  Poly3 operator*(double c) const {
    Poly3 r = *this;
    for (auto& m : r.terms) m.c *= c;
    return r;
  }
  bool zero() const { return terms.empty(); }

 private:
  static double ipow(double b, int e) {
    double r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  }
};

inline ScalarField poly_field(const Poly3& p) {
  ScalarField f;
  const Poly3 dx = p.derivative(0), dt = p.derivative(1), dy = p.derivative(2);
  f.value = [p](const double* q) { return p.eval(q); };
  f.gradient = [dx, dt, dy](const double* q, double* g) {
    g[0] = dx.eval(q);
    g[1] = dt.eval(q);
    g[2] = dy.eval(q);
  };
  return f;
}

}  // namespace charentropy

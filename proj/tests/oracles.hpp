#pragma once

// Test-only oracles, kept independent of the library's quadrature and
// admissibility code paths.

#include <cmath>
#include <functional>
#include <random>

namespace oracles {

// Adaptive Simpson quadrature to a requested absolute tolerance.
inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10) {
  if (!(b > a)) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Oleinik chord condition for a scalar flux: the shock (ul -> ur) moving at
// the chord speed is admissible iff the chord lies below the graph from the
// left state, i.e. for every v between the states
//   (F(v) - F(ul)) / (v - ul) >= s >= (F(v) - F(ur)) / (v - ur).
inline bool oleinik_admissible(const std::function<double(double)>& F, double ul, double ur,
                               double s, int samples = 257) {
  const double lo = std::min(ul, ur), hi = std::max(ul, ur);
  for (int i = 1; i <= samples; ++i) {
    const double v = lo + (hi - lo) * i / (samples + 1);
    const double left = (F(v) - F(ul)) / (v - ul);
    const double right = (F(v) - F(ur)) / (v - ur);
    if (!(left >= s - 1e-12 && s >= right - 1e-12)) return false;
  }
  return true;
}

inline std::mt19937_64 rng(unsigned seed = 987654321u) { return std::mt19937_64(seed); }

}  // namespace oracles

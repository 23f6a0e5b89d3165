#pragma once

/** Reference producers of admissible and inadmissible solutions: exact
    Riemann solutions for strictly convex flux, a first-order Godunov
    scheme with exact Riemann fluxes, and the shock-gluing construction
    joining two classical solutions along an integrated jump curve. */

#include <functional>

#include "charentropy/characteristics.hpp"
#include "charentropy/model.hpp"

namespace charentropy::solver {

using characteristics::GridSpec;
using model::FluxModel;
using model::PiecewiseSection;

struct ConvexFlux {
  std::function<double(double)> f;
  std::function<double(double)> df;  // optional; finite differences otherwise
  double fd_step = kDefaultFdStep;

  double eval(double u) const { return f(u); }
  double slope(double u) const {
    if (df) return df(u);
    return (f(u + fd_step) - f(u - fd_step)) / (2 * fd_step);
  }
};

ConvexFlux burgers_flux();
// Convexity probe over an interval; throws for non-convex flux.
void require_convex(const ConvexFlux& F, double lo, double hi, int samples = 257);

// Exact similarity solution value at xi = x / t.
double riemann_exact(const ConvexFlux& F, double u_left, double u_right, double xi);

enum class Boundary { kOutflow, kPeriodic };

// First-order Godunov update with exact Riemann interface fluxes; the
// returned section carries every time level as a lattice row and declares
// no jumps (verification runs in smeared mode).
PiecewiseSection godunov_solve(const ConvexFlux& F, const std::function<double(double)>& u0,
                               double x0, double x1, int nx, double T, double cfl,
                               Boundary boundary = Boundary::kOutflow);

// Glues two classical solutions along the Rankine-Hugoniot curve from the
// seed point. sigma1 takes the left side, sigma2 the right; errors when
// the entering-characteristic rule fails on both sides.
PiecewiseSection glue_classical_pair(const FluxModel& model,
                                     const std::function<double(const double*)>& sigma1,
                                     const std::function<double(const double*)>& sigma2,
                                     const Vec2& seed, const GridSpec& grid);

}  // namespace charentropy::solver

#pragma once

/** Characteristic ODE tracing, the method-of-characteristics classical
    solver, the projective slope map kappa, and the transversality checks. */

#include <optional>
#include <vector>

#include "charentropy/model.hpp"

namespace charentropy::characteristics {

using model::FluxModel;
using model::PiecewiseSection;

struct CharacteristicCurve {
  std::vector<double> s;       // parameter samples
  std::vector<Vec3> states;    // (x, t, y)
  double step = 0;
  bool exited_domain = false;
};

// RK4 integration of dz/ds = dZ/dy, dy/ds = -(dZ1/dx + dZ2/dt) - S.
// Stops at the domain boundary with the exit flag set; an immediate exit
// is an error.
CharacteristicCurve trace_characteristic(const FluxModel& model, const Vec3& start, double span,
                                         double step);

struct GridSpec {
  double x0 = -1, x1 = 1;
  int nx = 101;
  double t0 = 0, t1 = 1;
  int nt = 101;
};

struct ClassicalSolution {
  PiecewiseSection section;
  double first_crossing_time = 0;  // min(T, detected crossing)
  bool crossed = false;
};

// Method-of-characteristics solve of the divergence-form equation from
// initial data u0 at t = t0, valid until the characteristic fan folds
// (Jacobian sign change). Errors if the fan folds before the first grid line.
ClassicalSolution classical_solve(const FluxModel& model, const std::function<double(double)>& u0,
                                  double T, const GridSpec& grid, int fan_rays = 0);

// Projective slope of the projected characteristic direction in the
// canonical chart: kappa = (dZ1/dy) / (dZ2/dy).
double kappa(const FluxModel& model, const Vec3& f);
double kappa_fiber_derivative(const FluxModel& model, const Vec3& f);

struct TransversalityReport {
  bool tp1 = false;
  bool tp2 = false;
  std::vector<Vec3> tp1_witnesses;  // sampled fiber points where TP I fails
  std::vector<Vec3> tp2_witnesses;
  std::optional<Vec2> found_h;      // direction found by the search mode
};

// TP I with the base line H given as a direction; when H is nullopt a
// 16-direction candidate set is searched and the first direction that
// works is reported. TP II for m = 2 reduces to a nonvanishing fiber
// derivative of kappa on the interval.
TransversalityReport check_transversality(const FluxModel& model, const Vec2& z0,
                                          double fiber_lo, double fiber_hi,
                                          std::optional<Vec2> h_direction,
                                          int samples = 65, double tol = 1e-10);

}  // namespace charentropy::characteristics

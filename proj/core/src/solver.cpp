#include "charentropy/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "charentropy/entropy.hpp"

namespace charentropy::solver {

ConvexFlux burgers_flux() {
  ConvexFlux F;
  F.f = [](double u) { return 0.5 * u * u; };
  F.df = [](double u) { return u; };
  return F;
}

void require_convex(const ConvexFlux& F, double lo, double hi, int samples) {
  const double h = std::max(1e-6, (hi - lo) / (4.0 * samples));
  for (int i = 0; i < samples; ++i) {
    const double u = lo + (hi - lo) * i / (samples - 1);
    const double second = (F.eval(u + h) - 2 * F.eval(u) + F.eval(u - h)) / (h * h);
    if (!(second > 0)) {
      std::ostringstream msg;
      msg << "riemann: flux is not strictly convex near u = " << u;
      throw InputError(msg.str());
    }
  }
}

namespace {

// Inverts the monotone derivative F' on [lo, hi] by bisection.
double invert_slope(const ConvexFlux& F, double xi, double lo, double hi) {
  double a = lo, b = hi;
  double fa = F.slope(a) - xi;
  for (int it = 0; it < 80; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = F.slope(m) - xi;
    if ((fa <= 0) == (fm <= 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double riemann_exact(const ConvexFlux& F, double u_left, double u_right, double xi) {
  const double lo = std::min(u_left, u_right), hi = std::max(u_left, u_right);
  if (u_left == u_right) return u_left;
  require_convex(F, lo, hi, 65);
  if (u_left > u_right) {
    const double s = (F.eval(u_left) - F.eval(u_right)) / (u_left - u_right);
    return xi < s ? u_left : u_right;
  }
  // rarefaction fan between the characteristic slopes
  const double sl = F.slope(u_left), sr = F.slope(u_right);
  if (xi <= sl) return u_left;
  if (xi >= sr) return u_right;
  return invert_slope(F, xi, u_left, u_right);
}

PiecewiseSection godunov_solve(const ConvexFlux& F, const std::function<double(double)>& u0,
                               double x0, double x1, int nx, double T, double cfl,
                               Boundary boundary) {
  if (!(cfl > 0) || cfl > 0.9) throw InputError("godunov_solve: require 0 < cfl <= 0.9");
  if (nx < 4 || !(x1 > x0) || !(T > 0)) throw InputError("godunov_solve: bad grid request");
  const double dx = (x1 - x0) / nx;

  std::vector<double> cell(nx);
  for (int i = 0; i < nx; ++i) cell[i] = u0(x0 + (i + 0.5) * dx);

  double smax = 1e-12;
  for (int i = 0; i < nx; ++i) smax = std::max(smax, std::fabs(F.slope(cell[i])));
  const double dt = cfl * dx / smax;
  const int steps = static_cast<int>(std::ceil(T / dt));

  // Sonic state for the interface flux of a convex flux.
  double ulo = cell[0], uhi = cell[0];
  for (double v : cell) {
    ulo = std::min(ulo, v);
    uhi = std::max(uhi, v);
  }
  require_convex(F, ulo - 1e-6, uhi + 1e-6, 65);
  const double sonic = invert_slope(F, 0.0, ulo - 1.0, uhi + 1.0);
  auto godunov_flux = [&](double ul, double ur) {
    if (ul <= ur) {
      // minimum of F over [ul, ur]
      double m = std::min(F.eval(ul), F.eval(ur));
      if (sonic > ul && sonic < ur) m = std::min(m, F.eval(sonic));
      return m;
    }
    double m = std::max(F.eval(ul), F.eval(ur));
    if (sonic > ur && sonic < ul) m = std::max(m, F.eval(sonic));
    return m;
  };

  PiecewiseSection s;
  s.xs.resize(nx);
  for (int i = 0; i < nx; ++i) s.xs[i] = x0 + (i + 0.5) * dx;
  s.ts.reserve(steps + 1);
  s.u.reserve(static_cast<std::size_t>(nx) * (steps + 1));

  double t = 0;
  s.ts.push_back(t);
  s.u.insert(s.u.end(), cell.begin(), cell.end());
  std::vector<double> flux(nx + 1);
  for (int step = 0; step < steps; ++step) {
    const double h = std::min(dt, T - t);
    for (int i = 1; i < nx; ++i) flux[i] = godunov_flux(cell[i - 1], cell[i]);
    if (boundary == Boundary::kPeriodic) {
      flux[0] = godunov_flux(cell[nx - 1], cell[0]);
      flux[nx] = flux[0];
    } else {
      flux[0] = F.eval(cell[0]);
      flux[nx] = F.eval(cell[nx - 1]);
    }
    for (int i = 0; i < nx; ++i) cell[i] -= h / dx * (flux[i + 1] - flux[i]);
    t += h;
    s.ts.push_back(t);
    s.u.insert(s.u.end(), cell.begin(), cell.end());
  }
  return s;
}

PiecewiseSection glue_classical_pair(const FluxModel& model,
                                     const std::function<double(const double*)>& sigma1,
                                     const std::function<double(const double*)>& sigma2,
                                     const Vec2& seed, const GridSpec& grid) {
  model.require_m2("glue_classical_pair");
  {
    const double z0[2] = {seed[0], seed[1]};
    if (std::fabs(sigma1(z0) - sigma2(z0)) < 1e-12)
      throw InputError("glue_classical_pair: sigma1 == sigma2 at the seed point");
  }

  auto shock_speed = [&](const double* z) {
    const double u1 = sigma1(z), u2 = sigma2(z);
    double f1[2], f2[2];
    model.eval_flux(z, u1, f1);
    model.eval_flux(z, u2, f2);
    const double dZ2 = f1[1] - f2[1];
    if (std::fabs(dZ2) < 1e-13)
      throw NumericsError("glue_classical_pair: degenerate jump, dZ2 difference vanished");
    return (f1[0] - f2[0]) / dZ2;
  };

  // Entering-characteristic rule at the seed: the left state's projected
  // characteristic must run into the curve (slope above the shock speed),
  // the right state's must be overtaken (slope below).
  {
    const double z0[2] = {seed[0], seed[1]};
    const double s = shock_speed(z0);
    const double c1 = characteristics::kappa(model, {seed[0], seed[1], sigma1(z0)});
    const double c2 = characteristics::kappa(model, {seed[0], seed[1], sigma2(z0)});
    if (!(c1 > s + 1e-12) && !(c2 < s - 1e-12))
      throw NumericsError(
          "glue_classical_pair: characteristics leave the curve on both sides, no admissible shock");
    if (!(c1 > s + 1e-12) || !(c2 < s - 1e-12))
      throw NumericsError(
          "glue_classical_pair: entering-characteristic rule fails on one side at the seed");
  }

  // Integrate dx/dt = RH speed through the grid's t-range, both directions.
  const int nt = grid.nt;
  std::vector<double> ts(nt), xs_curve(nt);
  for (int j = 0; j < nt; ++j) ts[j] = grid.t0 + (grid.t1 - grid.t0) * j / (nt - 1);

  auto rk4 = [&](double x, double t, double h) {
    auto f = [&](double xx, double tt) {
      const double z[2] = {xx, tt};
      return shock_speed(z);
    };
    const double k1 = f(x, t);
    const double k2 = f(x + 0.5 * h * k1, t + 0.5 * h);
    const double k3 = f(x + 0.5 * h * k2, t + 0.5 * h);
    const double k4 = f(x + h * k3, t + h);
    return x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  };

  // locate seed between grid lines and march out
  int j_seed = 0;
  for (int j = 0; j < nt; ++j)
    if (std::fabs(ts[j] - seed[1]) < std::fabs(ts[j_seed] - seed[1])) j_seed = j;
  const int sub = 4;
  {
    // march from the true seed time to the nearest grid line first
    double x = seed[0], t = seed[1];
    const double target = ts[j_seed];
    const double h = (target - t) / sub;
    if (std::fabs(h) > 0)
      for (int k = 0; k < sub; ++k) {
        x = rk4(x, t, h);
        t += h;
      }
    xs_curve[j_seed] = x;
  }
  for (int j = j_seed + 1; j < nt; ++j) {
    double x = xs_curve[j - 1], t = ts[j - 1];
    const double h = (ts[j] - ts[j - 1]) / sub;
    for (int k = 0; k < sub; ++k) {
      x = rk4(x, t, h);
      t += h;
    }
    xs_curve[j] = x;
  }
  for (int j = j_seed - 1; j >= 0; --j) {
    double x = xs_curve[j + 1], t = ts[j + 1];
    const double h = (ts[j] - ts[j + 1]) / sub;
    for (int k = 0; k < sub; ++k) {
      x = rk4(x, t, h);
      t += h;
    }
    xs_curve[j] = x;
  }

  PiecewiseSection out = model::make_two_state_section(sigma1, sigma2, ts, xs_curve, grid.x0,
                                                       grid.x1, grid.nx, grid.t0, grid.t1, nt);

  // Validate admissibility along the curve at segment midpoints, where the
  // polyline secant matches the instantaneous speed to second order.
  const auto& jc = out.jumps[0];
  const std::size_t nseg = jc.t.size() - 1;
  const double dt_seg = (jc.t.back() - jc.t.front()) / nseg;
  const double rh_tol = std::max(1e-9, 0.5 * dt_seg * dt_seg);
  const int checks = 20;
  for (int k = 0; k < checks; ++k) {
    const std::size_t seg = std::min(nseg - 1, k * nseg / checks);
    const double t = 0.5 * (jc.t[seg] + jc.t[seg + 1]);
    const double x = jc.x_at(t);
    const double slope = jc.slope_at(t);
    model::JumpData jd;
    jd.z = {x, t};
    const double nrm = std::hypot(1.0, slope);
    jd.nu = {1.0 / nrm, -slope / nrm};
    jd.u_left = jc.u_left(t);
    jd.u_right = jc.u_right(t);
    const auto verdict = entropy::jump_admissibility(model, jd, rh_tol);
    if (!verdict.entropic || std::fabs(verdict.rh_residual) > rh_tol) {
      std::ostringstream msg;
      msg << "glue_classical_pair: glued curve fails admissibility at t = " << t
          << " (rh = " << verdict.rh_residual << ", margin = " << verdict.margin << ")";
      throw NumericsError(msg.str());
    }
  }
  return out;
}

}  // namespace charentropy::solver

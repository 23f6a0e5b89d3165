#include "charentropy/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace charentropy::characteristics {

namespace {

void char_rhs(const FluxModel& m, const Vec3& p, Vec3& out) {
  const double z[2] = {p[0], p[1]};
  double dy[2];
  m.eval_flux_dy(z, p[2], dy);
  out[0] = dy[0];
  out[1] = dy[1];
  out[2] = -m.flux_divergence(z, p[2]) - m.eval_source(z, p[2]);
}

Vec3 rk4_step(const FluxModel& m, const Vec3& p, double h) {
  Vec3 k1, k2, k3, k4, q;
  char_rhs(m, p, k1);
  for (int i = 0; i < 3; ++i) q[i] = p[i] + 0.5 * h * k1[i];
  char_rhs(m, q, k2);
  for (int i = 0; i < 3; ++i) q[i] = p[i] + 0.5 * h * k2[i];
  char_rhs(m, q, k3);
  for (int i = 0; i < 3; ++i) q[i] = p[i] + h * k3[i];
  char_rhs(m, q, k4);
  Vec3 out;
  for (int i = 0; i < 3; ++i) out[i] = p[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

}  // namespace

CharacteristicCurve trace_characteristic(const FluxModel& model, const Vec3& start, double span,
                                         double step) {
  model.require_m2("trace_characteristic");
  if (!(step > 0)) throw InputError("trace_characteristic: step must be positive");
  if (!model.in_domain(start.data()))
    throw InputError("trace_characteristic: start point outside model domain");
  CharacteristicCurve curve;
  curve.step = step;
  curve.s.push_back(0);
  curve.states.push_back(start);
  const double dir = span >= 0 ? 1.0 : -1.0;
  const double total = std::fabs(span);
  double s = 0;
  Vec3 p = start;
  while (s < total - 1e-15) {
    const double h = dir * std::min(step, total - s);
    const Vec3 next = rk4_step(model, p, h);
    if (!model.in_domain(next.data())) {
      curve.exited_domain = true;
      break;
    }
    s += std::fabs(h);
    p = next;
    curve.s.push_back(dir * s);
    curve.states.push_back(p);
  }
  if (curve.states.size() == 1 && curve.exited_domain)
    throw NumericsError("trace_characteristic: immediate domain exit, empty curve");
  return curve;
}

double kappa(const FluxModel& model, const Vec3& f) {
  model.require_m2("kappa");
  const double z[2] = {f[0], f[1]};
  double dy[2];
  model.eval_flux_dy(z, f[2], dy);
  if (std::fabs(dy[1]) < 1e-12) {
    std::ostringstream msg;
    msg << "kappa: canonical chart unavailable, dZ2/dy = 0 at (" << f[0] << ", " << f[1] << ", "
        << f[2] << ")";
    throw NumericsError(msg.str());
  }
  return dy[0] / dy[1];
}

double kappa_fiber_derivative(const FluxModel& model, const Vec3& f) {
  const double h = model.fd_step;
  Vec3 fp = f, fm = f;
  fp[2] += h;
  fm[2] -= h;
  return (kappa(model, fp) - kappa(model, fm)) / (2 * h);
}

ClassicalSolution classical_solve(const FluxModel& model, const std::function<double(double)>& u0,
                                  double T, const GridSpec& grid, int fan_rays) {
  model.require_m2("classical_solve");
  if (!(T > grid.t0)) throw InputError("classical_solve: need T > t0");
  const int nrays = fan_rays > 1 ? fan_rays : std::max(401, 4 * grid.nx + 1);

  // Seed the fan wide enough that characteristics cover the grid x-range.
  double kmax = 1.0;
  for (int k = 0; k < 33; ++k) {
    const double x = grid.x0 + (grid.x1 - grid.x0) * k / 32.0;
    const Vec3 f{x, grid.t0, u0(std::clamp(x, grid.x0, grid.x1))};
    kmax = std::max(kmax, std::fabs(kappa(model, f)));
  }
  const double margin = 1.25 * kmax * (T - grid.t0) + 0.01 * (grid.x1 - grid.x0);
  const double seed0 = grid.x0 - margin, seed1 = grid.x1 + margin;

  model::PiecewiseSection sec = model::make_section_grid(grid.x0, grid.x1, grid.nx, grid.t0, T,
                                                         grid.nt);
  const std::vector<double>& ts = sec.ts;

  // Integrate the fan parameterized by t (canonical chart: dZ2/dy > 0).
  std::vector<double> ray_x(nrays), ray_y(nrays);
  for (int k = 0; k < nrays; ++k) {
    ray_x[k] = seed0 + (seed1 - seed0) * k / (nrays - 1);
    ray_y[k] = u0(std::clamp(ray_x[k], grid.x0, grid.x1));
  }
  std::vector<double> prev_x = ray_x, prev_y = ray_y;

  double crossing = T;
  bool crossed = false;

  auto advance = [&](double t_from, double t_to) {
    const int sub = 8;
    const double h = (t_to - t_from) / sub;
    for (int k = 0; k < nrays; ++k) {
      double x = ray_x[k], y = ray_y[k], t = t_from;
      for (int s = 0; s < sub; ++s) {
        // RK4 in t for dx/dt = kappa, dy/dt = drift / (dZ2/dy)
        auto rhs = [&](double xx, double tt, double yy, double& dx, double& dy2) {
          const double z[2] = {xx, tt};
          double dzy[2];
          model.eval_flux_dy(z, yy, dzy);
          if (std::fabs(dzy[1]) < 1e-12)
            throw NumericsError("classical_solve: dZ2/dy vanished along a characteristic");
          dx = dzy[0] / dzy[1];
          dy2 = (-model.flux_divergence(z, yy) - model.eval_source(z, yy)) / dzy[1];
        };
        double k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
        rhs(x, t, y, k1x, k1y);
        rhs(x + 0.5 * h * k1x, t + 0.5 * h, y + 0.5 * h * k1y, k2x, k2y);
        rhs(x + 0.5 * h * k2x, t + 0.5 * h, y + 0.5 * h * k2y, k3x, k3y);
        rhs(x + h * k3x, t + h, y + h * k3y, k4x, k4y);
        x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
        y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
        t += h;
      }
      ray_x[k] = x;
      ray_y[k] = y;
    }
  };

  auto fill_row = [&](std::size_t j) {
    for (std::size_t i = 0; i < sec.xs.size(); ++i) {
      const double x = sec.xs[i];
      auto it = std::lower_bound(ray_x.begin(), ray_x.end(), x);
      std::size_t hi = std::min<std::size_t>(nrays - 1,
                                             std::max<std::ptrdiff_t>(1, it - ray_x.begin()));
      const std::size_t lo = hi - 1;
      const double denom = ray_x[hi] - ray_x[lo];
      const double w = denom > 0 ? std::clamp((x - ray_x[lo]) / denom, 0.0, 1.0) : 0.5;
      sec.at(i, j) = ray_y[lo] + w * (ray_y[hi] - ray_y[lo]);
    }
  };

  fill_row(0);
  std::size_t last_row = 0;
  for (std::size_t j = 1; j < ts.size(); ++j) {
    prev_x = ray_x;
    advance(ts[j - 1], ts[j]);
    // Fan fold: adjacent rays cross when their spacing changes sign.
    double fold_time = ts[j] + 1;
    for (int k = 0; k + 1 < nrays; ++k) {
      const double d0 = prev_x[k + 1] - prev_x[k];
      const double d1 = ray_x[k + 1] - ray_x[k];
      if (d1 <= 0 && d0 > 0) {
        const double w = d0 / (d0 - d1);
        fold_time = std::min(fold_time, ts[j - 1] + w * (ts[j] - ts[j - 1]));
      } else if (d1 <= 0) {
        fold_time = std::min(fold_time, ts[j - 1]);
      }
    }
    if (fold_time <= ts[j]) {
      crossing = fold_time;
      crossed = true;
      if (j == 1) {
        std::ostringstream msg;
        msg << "classical_solve: characteristics cross at t = " << fold_time
            << ", before the first grid line";
        throw NumericsError(msg.str());
      }
      break;
    }
    fill_row(j);
    last_row = j;
  }

  ClassicalSolution out;
  out.crossed = crossed;
  out.first_crossing_time = crossed ? crossing : T;
  if (crossed) {
    // keep only rows strictly before the fold
    model::PiecewiseSection trimmed = sec;
    trimmed.ts.assign(sec.ts.begin(), sec.ts.begin() + last_row + 1);
    trimmed.u.assign(sec.u.begin(), sec.u.begin() + (last_row + 1) * sec.xs.size());
    out.section = std::move(trimmed);
  } else {
    out.section = std::move(sec);
  }
  return out;
}

TransversalityReport check_transversality(const FluxModel& model, const Vec2& z0, double fiber_lo,
                                          double fiber_hi, std::optional<Vec2> h_direction,
                                          int samples, double tol) {
  model.require_m2("check_transversality");
  if (!(fiber_hi > fiber_lo)) throw InputError("check_transversality: empty fiber interval");
  TransversalityReport rep;

  auto tp1_for = [&](const Vec2& h) {
    std::vector<Vec3> witnesses;
    const double norm = std::hypot(h[0], h[1]);
    if (norm < 1e-14) throw InputError("check_transversality: H must be a line");
    for (int k = 0; k < samples; ++k) {
      const double y = fiber_lo + (fiber_hi - fiber_lo) * k / (samples - 1);
      double dzy[2];
      model.eval_flux_dy(z0.data(), y, dzy);
      const double det = h[0] * dzy[1] - h[1] * dzy[0];
      const double scale = norm * std::hypot(dzy[0], dzy[1]);
      if (std::fabs(det) <= tol * std::max(1.0, scale)) witnesses.push_back({z0[0], z0[1], y});
    }
    return witnesses;
  };

  if (h_direction) {
    rep.tp1_witnesses = tp1_for(*h_direction);
    rep.tp1 = rep.tp1_witnesses.empty();
  } else {
    // The choice of H is existential; search a 16-direction candidate set.
    for (int d = 0; d < 16; ++d) {
      const double ang = 3.14159265358979323846 * d / 16.0;
      const Vec2 h{std::cos(ang), std::sin(ang)};
      auto witnesses = tp1_for(h);
      if (witnesses.empty()) {
        rep.tp1 = true;
        rep.found_h = h;
        break;
      }
    }
    if (!rep.tp1) rep.tp1_witnesses = tp1_for(Vec2{1, 0});
  }

  // TP II for m = 2: K = {0}, so the widened image spans the plane exactly
  // when the fiber derivative of kappa does not vanish.
  rep.tp2 = true;
  for (int k = 0; k < samples; ++k) {
    const double y = fiber_lo + (fiber_hi - fiber_lo) * k / (samples - 1);
    const Vec3 f{z0[0], z0[1], y};
    if (std::fabs(kappa_fiber_derivative(model, f)) <= tol) {
      rep.tp2 = false;
      rep.tp2_witnesses.push_back(f);
    }
  }
  return rep;
}

}  // namespace charentropy::characteristics

#include "charentropy/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace charentropy::model {

void FluxModel::eval_flux_dy(const double* z, double y, double* out) const {
  if (flux_dy) {
    flux_dy(z, y, out);
    return;
  }
  double p[2], m[2];
  flux(z, y + fd_step, p);
  flux(z, y - fd_step, m);
  out[0] = (p[0] - m[0]) / (2 * fd_step);
  out[1] = (p[1] - m[1]) / (2 * fd_step);
}

void FluxModel::eval_flux_dz(const double* z, double y, double* out) const {
  if (flux_dz) {
    flux_dz(z, y, out);
    return;
  }
  double q[2] = {z[0], z[1]};
  double p[2], m[2];
  for (int j = 0; j < 2; ++j) {
    q[j] = z[j] + fd_step;
    flux(q, y, p);
    q[j] = z[j] - fd_step;
    flux(q, y, m);
    q[j] = z[j];
    out[0 * 2 + j] = (p[0] - m[0]) / (2 * fd_step);
    out[1 * 2 + j] = (p[1] - m[1]) / (2 * fd_step);
  }
}

double FluxModel::flux_divergence(const double* z, double y) const {
  double dz[4];
  eval_flux_dz(z, y, dz);
  return dz[0 * 2 + 0] + dz[1 * 2 + 1];
}

void FluxModel::require_m2(const char* op) const {
  if (m != 2)
    throw InputError(std::string(op) + ": unsupported dimension m = " + std::to_string(m) +
                     " (numerical operations require m = 2)");
}

geom::VectorField characteristic_field(const FluxModel& model) {
  model.require_m2("characteristic_field");
  geom::VectorField X;
  X.dim = 3;
  X.domain = model.domain;
  X.fd_step = model.fd_step;
  const FluxModel m = model;
  X.components = [m](const double* p, double* out) {
    const double z[2] = {p[0], p[1]};
    double dy[2];
    m.eval_flux_dy(z, p[2], dy);
    out[0] = dy[0];
    out[1] = dy[1];
    out[2] = -m.flux_divergence(z, p[2]) - m.eval_source(z, p[2]);
  };
  if (model.poly) {
    const auto poly = model.poly;
    const Poly3 z1y = poly->z1.derivative(kAxisY);
    const Poly3 z2y = poly->z2.derivative(kAxisY);
    const Poly3 drift =
        (poly->z1.derivative(kAxisX) + poly->z2.derivative(kAxisT) + poly->source) * -1.0;
    const Poly3 rows[3] = {z1y, z2y, drift};
    Poly3 deriv[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) deriv[i][j] = rows[i].derivative(j);
    std::array<Poly3, 9> flat;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) flat[i * 3 + j] = deriv[i][j];
    X.jacobian = [flat](const double* p, double* jac) {
      for (int k = 0; k < 9; ++k) jac[k] = flat[k].eval(p);
    };
  } else if (model.flux_dy_dz) {
    // base rows of the jacobian come from the mixed jet; the remaining
    // entries need second fiber/base derivatives and fall back to
    // differences of the first jets
    X.jacobian = [m](const double* p, double* jac) {
      const double z[2] = {p[0], p[1]};
      double mixed[4];
      m.flux_dy_dz(z, p[2], mixed);
      jac[0 * 3 + 0] = mixed[0 * 2 + 0];
      jac[0 * 3 + 1] = mixed[0 * 2 + 1];
      jac[1 * 3 + 0] = mixed[1 * 2 + 0];
      jac[1 * 3 + 1] = mixed[1 * 2 + 1];
      const double h = m.fd_step;
      double dyp[2], dym[2];
      m.eval_flux_dy(z, p[2] + h, dyp);
      m.eval_flux_dy(z, p[2] - h, dym);
      jac[0 * 3 + 2] = (dyp[0] - dym[0]) / (2 * h);
      jac[1 * 3 + 2] = (dyp[1] - dym[1]) / (2 * h);
      double q[2] = {p[0], p[1]};
      for (int j = 0; j < 2; ++j) {
        q[j] = p[j] + h;
        const double dp = -m.flux_divergence(q, p[2]) - m.eval_source(q, p[2]);
        q[j] = p[j] - h;
        const double dm = -m.flux_divergence(q, p[2]) - m.eval_source(q, p[2]);
        q[j] = p[j];
        jac[2 * 3 + j] = (dp - dm) / (2 * h);
      }
      const double drift_p = -m.flux_divergence(z, p[2] + h) - m.eval_source(z, p[2] + h);
      const double drift_m = -m.flux_divergence(z, p[2] - h) - m.eval_source(z, p[2] - h);
      jac[2 * 3 + 2] = (drift_p - drift_m) / (2 * h);
    };
  }
  return X;
}

FluxModel make_polynomial_model(const Poly3& z1, const Poly3& z2, const Poly3& source,
                                const Box& domain) {
  FluxModel m;
  m.m = 2;
  m.domain = domain;
  auto poly = std::make_shared<PolyFlux>();
  poly->z1 = z1;
  poly->z2 = z2;
  poly->source = source;
  m.poly = poly;
  const Poly3 z1y = z1.derivative(kAxisY), z2y = z2.derivative(kAxisY);
  const Poly3 z1x = z1.derivative(kAxisX), z1t = z1.derivative(kAxisT);
  const Poly3 z2x = z2.derivative(kAxisX), z2t = z2.derivative(kAxisT);
  const Poly3 z1yx = z1y.derivative(kAxisX), z1yt = z1y.derivative(kAxisT);
  const Poly3 z2yx = z2y.derivative(kAxisX), z2yt = z2y.derivative(kAxisT);
  m.flux = [z1, z2](const double* z, double y, double* out) {
    const double p[3] = {z[0], z[1], y};
    out[0] = z1.eval(p);
    out[1] = z2.eval(p);
  };
  m.source = [source](const double* z, double y) {
    const double p[3] = {z[0], z[1], y};
    return source.eval(p);
  };
  m.flux_dy = [z1y, z2y](const double* z, double y, double* out) {
    const double p[3] = {z[0], z[1], y};
    out[0] = z1y.eval(p);
    out[1] = z2y.eval(p);
  };
  m.flux_dz = [z1x, z1t, z2x, z2t](const double* z, double y, double* out) {
    const double p[3] = {z[0], z[1], y};
    out[0] = z1x.eval(p);
    out[1] = z1t.eval(p);
    out[2] = z2x.eval(p);
    out[3] = z2t.eval(p);
  };
  m.flux_dy_dz = [z1yx, z1yt, z2yx, z2yt](const double* z, double y, double* out) {
    const double p[3] = {z[0], z[1], y};
    out[0] = z1yx.eval(p);
    out[1] = z1yt.eval(p);
    out[2] = z2yx.eval(p);
    out[3] = z2yt.eval(p);
  };
  return m;
}

FluxModel make_flat_projective_model(const Box& domain) {
  Poly3 z1{{{0.5, 0, 0, 2}}};
  Poly3 z2{{{1.0, 0, 0, 1}}};
  FluxModel m = make_polynomial_model(z1, z2, Poly3{}, domain);
  ScalarField inv_y;
  inv_y.value = [](const double* p) { return p[2]; };
  inv_y.gradient = [](const double*, double* g) {
    g[0] = 0;
    g[1] = 0;
    g[2] = 1;
  };
  ScalarField inv_ray;  // x - t y: labels the projected characteristic line
  inv_ray.value = [](const double* p) { return p[0] - p[1] * p[2]; };
  inv_ray.gradient = [](const double* p, double* g) {
    g[0] = 1;
    g[1] = -p[2];
    g[2] = -p[1];
  };
  m.leaf_invariants = {inv_y, inv_ray};
  return m;
}

FluxModel make_flat_projective_model() {
  return make_flat_projective_model(make_box3(-2, 2, -2, 2, -2, 2));
}

geom::VectorField EntropyDensity::field() const {
  geom::VectorField base = characteristic_field(flux_model);
  geom::VectorField out = base;
  const ScalarField scale = field_scale;
  out.components = [base, scale](const double* p, double* v) {
    base.eval(p, v);
    const double s = scale.value(p);
    v[0] *= s;
    v[1] *= s;
    v[2] *= s;
  };
  if (base.jacobian && scale.gradient) {
    out.jacobian = [base, scale](const double* p, double* jac) {
      double v[3], j0[9], g[3];
      base.eval(p, v);
      base.jacobian(p, j0);
      scale.gradient(p, g);
      const double s = scale.value(p);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) jac[i * 3 + j] = s * j0[i * 3 + j] + g[j] * v[i];
    };
  } else {
    out.jacobian = nullptr;
  }
  return out;
}

EntropyDensity unit_density(const FluxModel& model) {
  EntropyDensity rho;
  rho.flux_model = model;
  rho.weight = constant_field(1.0);
  rho.field_scale = constant_field(1.0);
  return rho;
}

EntropyDensity canonicalize(const EntropyDensity& rho, const Box& region, int samples_per_axis) {
  rho.flux_model.require_m2("canonicalize");
  if (rho.canonical) return rho;
  const FluxModel m = rho.flux_model;
  const ScalarField scale = rho.field_scale;
  // t-component of the scaled field must not vanish
  const int n = std::max(2, samples_per_axis);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double p[3];
        p[0] = region.lo[0] + region.extent(0) * i / (n - 1);
        p[1] = region.lo[1] + region.extent(1) * j / (n - 1);
        p[2] = region.lo[2] + region.extent(2) * k / (n - 1);
        double dy[2];
        m.eval_flux_dy(p, p[2], dy);
        if (std::fabs(dy[1] * scale.value(p)) < 1e-12) {
          std::ostringstream msg;
          msg << "canonicalize: t-component of the characteristic field vanishes at (" << p[0]
              << ", " << p[1] << ", " << p[2] << ")";
          throw NumericsError(msg.str());
        }
      }
  EntropyDensity out = rho;
  const ScalarField w = rho.weight;
  out.weight.value = [m, w, scale](const double* p) {
    double dy[2];
    m.eval_flux_dy(p, p[2], dy);
    return w.value(p) * scale.value(p) * dy[1];
  };
  out.weight.gradient = nullptr;
  out.field_scale.value = [m](const double* p) {
    double dy[2];
    m.eval_flux_dy(p, p[2], dy);
    return 1.0 / dy[1];
  };
  out.field_scale.gradient = nullptr;
  out.canonical = true;
  return out;
}

// ---------------------------------------------------------------------------
// Sections

double JumpCurve::x_at(double time) const {
  if (t.size() == 1) return x.front();
  auto it = std::upper_bound(t.begin(), t.end(), time);
  std::size_t hi = std::min<std::size_t>(t.size() - 1, std::max<std::ptrdiff_t>(1, it - t.begin()));
  const std::size_t lo = hi - 1;
  const double w = (time - t[lo]) / (t[hi] - t[lo]);
  return x[lo] + w * (x[hi] - x[lo]);
}

double JumpCurve::slope_at(double time) const {
  if (t.size() == 1) return 0.0;
  auto it = std::upper_bound(t.begin(), t.end(), time);
  std::size_t hi = std::min<std::size_t>(t.size() - 1, std::max<std::ptrdiff_t>(1, it - t.begin()));
  const std::size_t lo = hi - 1;
  return (x[hi] - x[lo]) / (t[hi] - t[lo]);
}

double PiecewiseSection::eval_side(double x, double t, const JumpCurve& jump, int side) const {
  const double z[2] = {x, t};
  if (side < 0) return jump.ext_left ? jump.ext_left(z) : jump.u_left(t);
  return jump.ext_right ? jump.ext_right(z) : jump.u_right(t);
}

const JumpCurve* PiecewiseSection::cell_jump(std::size_t i, std::size_t j) const {
  if (cell_jump_index_.empty()) return nullptr;
  const std::size_t ncx = xs.size() - 1;
  const int id = cell_jump_index_[j * ncx + i];
  return id < 0 ? nullptr : &jumps[id];
}

void PiecewiseSection::rebuild_jump_index() {
  if (xs.size() < 2 || ts.size() < 2) return;
  const std::size_t ncx = xs.size() - 1, nct = ts.size() - 1;
  cell_jump_index_.assign(ncx * nct, -1);
  for (std::size_t jid = 0; jid < jumps.size(); ++jid) {
    const JumpCurve& jc = jumps[jid];
    for (std::size_t j = 0; j < nct; ++j) {
      const double t0 = ts[j], t1 = ts[j + 1];
      if (t1 < jc.t.front() || t0 > jc.t.back()) continue;
      const double a = std::max(t0, jc.t.front());
      const double b = std::min(t1, jc.t.back());
      double xmin = std::min(jc.x_at(a), jc.x_at(b));
      double xmax = std::max(jc.x_at(a), jc.x_at(b));
      for (const auto tv : jc.t)
        if (tv > a && tv < b) {
          xmin = std::min(xmin, jc.x_at(tv));
          xmax = std::max(xmax, jc.x_at(tv));
        }
      for (std::size_t i = 0; i < ncx; ++i) {
        if (xs[i + 1] < xmin || xs[i] > xmax) continue;
        cell_jump_index_[j * ncx + i] = static_cast<int>(jid);
      }
    }
  }
}

double PiecewiseSection::eval(double x, double t) const {
  const std::size_t nx = xs.size(), nt = ts.size();
  if (nx == 0 || nt == 0) throw InputError("section: empty grid");
  const double xa = std::clamp(x, xs.front(), xs.back());
  const double ta = std::clamp(t, ts.front(), ts.back());
  std::size_t i = nx > 1 ? std::min<std::size_t>(nx - 2, static_cast<std::size_t>((xa - xs.front()) /
                                                                                  (xs[1] - xs[0])))
                         : 0;
  std::size_t j = nt > 1 ? std::min<std::size_t>(nt - 2, static_cast<std::size_t>((ta - ts.front()) /
                                                                                  (ts[1] - ts[0])))
                         : 0;
  if (nx > 1 && nt > 1 && !cell_jump_index_.empty()) {
    const JumpCurve* jc = cell_jump(i, j);
    if (jc && jc->covers(ta)) {
      const double xc = jc->x_at(ta);
      return eval_side(x, t, *jc, x >= xc ? +1 : -1);
    }
  }
  if (nx == 1 || nt == 1) return u[j * nx + i];
  const double wx = (xa - xs[i]) / (xs[i + 1] - xs[i]);
  const double wt = (ta - ts[j]) / (ts[j + 1] - ts[j]);
  return (1 - wx) * (1 - wt) * at(i, j) + wx * (1 - wt) * at(i + 1, j) +
         (1 - wx) * wt * at(i, j + 1) + wx * wt * at(i + 1, j + 1);
}

double PiecewiseSection::min_value() const {
  double m = u.empty() ? 0.0 : u.front();
  for (double v : u) m = std::min(m, v);
  for (const auto& j : jumps)
    for (double tv : j.t) m = std::min({m, j.u_left(tv), j.u_right(tv)});
  return m;
}

double PiecewiseSection::max_value() const {
  double m = u.empty() ? 0.0 : u.front();
  for (double v : u) m = std::max(m, v);
  for (const auto& j : jumps)
    for (double tv : j.t) m = std::max({m, j.u_left(tv), j.u_right(tv)});
  return m;
}

PiecewiseSection make_section_grid(double x0, double x1, int nx, double t0, double t1, int nt) {
  if (nx < 1 || nt < 1 || !(x1 > x0) || !(t1 > t0))
    throw InputError("make_section_grid: bad lattice request");
  PiecewiseSection s;
  s.xs.resize(nx);
  s.ts.resize(nt);
  for (int i = 0; i < nx; ++i) s.xs[i] = x0 + (x1 - x0) * i / (nx - 1 ? nx - 1 : 1);
  for (int j = 0; j < nt; ++j) s.ts[j] = t0 + (t1 - t0) * j / (nt - 1 ? nt - 1 : 1);
  s.u.assign(static_cast<std::size_t>(nx) * nt, 0.0);
  return s;
}

PiecewiseSection make_constant_section(double value, double x0, double x1, int nx, double t0,
                                       double t1, int nt) {
  PiecewiseSection s = make_section_grid(x0, x1, nx, t0, t1, nt);
  std::fill(s.u.begin(), s.u.end(), value);
  return s;
}

PiecewiseSection make_two_state_section(std::function<double(const double*)> left,
                                        std::function<double(const double*)> right,
                                        std::vector<double> curve_t, std::vector<double> curve_x,
                                        double x0, double x1, int nx, double t0, double t1,
                                        int nt) {
  PiecewiseSection s = make_section_grid(x0, x1, nx, t0, t1, nt);
  JumpCurve jc;
  jc.t = std::move(curve_t);
  jc.x = std::move(curve_x);
  jc.ext_left = left;
  jc.ext_right = right;
  const JumpCurve curve_copy = jc;  // for trace closures
  jc.u_left = [left, curve_copy](double t) {
    const double z[2] = {curve_copy.x_at(t), t};
    return left(z);
  };
  jc.u_right = [right, curve_copy](double t) {
    const double z[2] = {curve_copy.x_at(t), t};
    return right(z);
  };
  s.jumps.push_back(jc);
  for (std::size_t j = 0; j < s.ts.size(); ++j)
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      const double z[2] = {s.xs[i], s.ts[j]};
      const double xc = s.jumps[0].covers(z[1]) ? s.jumps[0].x_at(z[1]) : s.jumps[0].x.front();
      s.at(i, j) = z[0] >= xc ? right(z) : left(z);
    }
  s.rebuild_jump_index();
  return s;
}

Layer default_layer(const PiecewiseSection& s, double pad) {
  const double lo = s.min_value() - pad, hi = s.max_value() + pad;
  Layer g;
  g.lower = [lo](const double*) { return lo; };
  g.upper = [hi](const double*) { return hi; };
  return g;
}

SectionReport validate_section(const PiecewiseSection& s, const Layer& layer) {
  SectionReport rep;
  for (std::size_t j = 0; j < s.ts.size(); ++j)
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      const double z[2] = {s.xs[i], s.ts[j]};
      const double v = s.at(i, j);
      if (!(v > layer.lower(z) && v < layer.upper(z)))
        rep.violations.push_back({z[0], z[1], v, "node outside layer"});
    }
  for (const auto& jc : s.jumps) {
    const int probes = 33;
    for (int k = 0; k < probes; ++k) {
      const double tt = jc.t.front() + (jc.t.back() - jc.t.front()) * k / (probes - 1);
      const double z[2] = {jc.x_at(tt), tt};
      for (const int side : {-1, +1}) {
        const double v = jc.side_value(tt, side);
        if (!(v > layer.lower(z) && v < layer.upper(z)))
          rep.violations.push_back({z[0], z[1], v, side < 0 ? "left trace outside layer"
                                                            : "right trace outside layer"});
      }
    }
  }
  return rep;
}

}  // namespace charentropy::model

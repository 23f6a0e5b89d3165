#include "charentropy/claws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "charentropy/support/parallel.hpp"

namespace charentropy::claws {

// ---------------------------------------------------------------------------
// Flux form dictionary

geom::FormField alpha_from_flux(const FluxModel& model, AlphaReport* report, bool validate) {
  model.require_m2("alpha_from_flux");
  geom::FormField a;
  a.dim = 3;
  a.degree = 1;
  a.domain = model.domain;
  a.fd_step = model.fd_step;
  const FluxModel m = model;
  a.coeffs = [m](const double* p, double* out) {
    double zf[2];
    m.eval_flux(p, p[2], zf);
    out[0] = -zf[1];  // dx coefficient = -Z2
    out[1] = zf[0];   // dt coefficient = Z1
    out[2] = 0;       // no dy component
  };
  a.coeff_jacobian = [m](const double* p, double* jac) {
    double dz[4], dy[2];
    m.eval_flux_dz(p, p[2], dz);
    m.eval_flux_dy(p, p[2], dy);
    // row 0: d(-Z2)/d(x,t,y)
    jac[0 * 3 + 0] = -dz[1 * 2 + 0];
    jac[0 * 3 + 1] = -dz[1 * 2 + 1];
    jac[0 * 3 + 2] = -dy[1];
    // row 1: d(Z1)/d(x,t,y)
    jac[1 * 3 + 0] = dz[0 * 2 + 0];
    jac[1 * 3 + 1] = dz[0 * 2 + 1];
    jac[1 * 3 + 2] = dy[0];
    // row 2: zero
    jac[2 * 3 + 0] = jac[2 * 3 + 1] = jac[2 * 3 + 2] = 0;
  };

  if (validate || report) {
    const geom::VectorField X = model::characteristic_field(model);
    AlphaReport rep;
    rep.min_iy_dalpha = std::numeric_limits<double>::infinity();
    const int n = 5;
    const Box& d = model.domain;
    const double margin = 1e-3;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double p[3];
          p[0] = d.lo[0] + margin + (d.extent(0) - 2 * margin) * i / (n - 1);
          p[1] = d.lo[1] + margin + (d.extent(1) - 2 * margin) * j / (n - 1);
          p[2] = d.lo[2] + margin + (d.extent(2) - 2 * margin) * k / (n - 1);
          double da[3];
          geom::exterior_derivative(a, p, da);
          double xv[3];
          X.eval(p, xv);
          // i_X dalpha on the (dx, dt, dy) basis from 2-form coeffs (xt, xy, ty)
          const double ix[3] = {-xv[1] * da[0] - xv[2] * da[1], xv[0] * da[0] - xv[2] * da[2],
                                xv[0] * da[1] + xv[1] * da[2]};
          rep.max_ix_dalpha = std::max(
              rep.max_ix_dalpha, std::max({std::fabs(ix[0]), std::fabs(ix[1]), std::fabs(ix[2])}));
          // i_Y dalpha with Y = d/dy: coefficients (-da_xy, -da_ty) on (dx, dt)
          const double iy = std::hypot(da[1], da[2]);
          rep.min_iy_dalpha = std::min(rep.min_iy_dalpha, iy);
        }
    if (report) *report = rep;
    if (validate && !(rep.min_iy_dalpha > 1e-10))
      throw NumericsError("alpha_from_flux: degeneracy warning, i_Y d(alpha) vanishes somewhere");
  }
  return a;
}

geom::VectorField field_from_alpha(const geom::FormField& alpha, const geom::FormField& volume) {
  if (alpha.degree != 1 || alpha.dim != 3)
    throw InputError("field_from_alpha: alpha must be a 1-form on the 3-space");
  geom::VectorField X;
  X.dim = 3;
  X.domain = alpha.domain;
  X.fd_step = alpha.fd_step;
  const geom::FormField a = alpha;
  const geom::FormField vol = volume;
  X.components = [a, vol](const double* p, double* out) {
    double da[3];
    geom::exterior_derivative(a, p, da);
    if (std::hypot(std::hypot(da[0], da[1]), da[2]) < 1e-12)
      throw NumericsError("field_from_alpha: d(alpha) = 0, degenerate conservation law");
    geom::field_from_two_form(vol, p, da, out);
  };
  // fail fast on closed alpha
  double probe[3] = {0.5 * (alpha.domain.lo[0] + alpha.domain.hi[0]),
                     0.5 * (alpha.domain.lo[1] + alpha.domain.hi[1]),
                     0.5 * (alpha.domain.lo[2] + alpha.domain.hi[2])};
  double tmp[3];
  X.components(probe, tmp);
  return X;
}

double classical_check_via_alpha(const geom::FormField& alpha, const PiecewiseSection& s,
                                 const entropy::TestFunction& phi) {
  if (phi.kind != entropy::TestFunction::Kind::kBumpOnBase)
    throw InputError("classical_check_via_alpha: phi must be a base test function");
  const Box supp = phi.support();
  if (supp.lo[0] < s.xs.front() || supp.hi[0] > s.xs.back() || supp.lo[1] < s.ts.front() ||
      supp.hi[1] > s.ts.back())
    throw InputError("classical_check_via_alpha: test support overlaps the grid boundary");
  std::vector<double> contrib;
  contrib.reserve(1024);
  entropy::for_each_cell_piece(s, supp, [&](const entropy::CellPiece& piece) {
    const double u = entropy::piece_value(s, piece);
    const double p[3] = {piece.centroid[0], piece.centroid[1], u};
    double ac[3], gphi[2];
    alpha.eval(p, ac);
    phi.grad(piece.centroid.data(), gphi);
    contrib.push_back((ac[0] * gphi[1] - ac[1] * gphi[0]) * piece.area);
  });
  double acc = 0;
  for (double c : contrib) acc += c;
  return acc;
}

// ---------------------------------------------------------------------------
// Foliation cuts

SurfacePatch make_graph_surface(std::function<double(double, double)> f, const Box& base_window,
                                std::function<bool(const Vec3&)> valid) {
  SurfacePatch s;
  s.param_domain = base_window;
  s.param_domain.dim = 2;
  auto fn = std::move(f);
  s.param = [fn](double a, double b) { return Vec3{a, b, fn(a, b)}; };
  s.level = [fn](const Vec3& p) { return p[2] - fn(p[0], p[1]); };
  s.valid = valid ? std::move(valid) : [](const Vec3&) { return true; };
  return s;
}

SurfacePatch flat_projective_cut_surface(const Box& base_window, double min_x) {
  auto f = [](double x, double t) { return -t / x; };
  auto valid = [min_x](const Vec3& p) { return p[0] >= min_x; };
  return make_graph_surface(f, base_window, valid);
}

Vec3 FoliationCut::flow_state(const Vec3& u, double time) const {
  const int n = std::max(1, static_cast<int>(std::ceil(std::fabs(time) / probe_step)) *
                                flow_substeps);
  const double h = time / n;
  Vec3 p = u;
  for (int k = 0; k < n; ++k) {
    double k1[3], k2[3], k3[3], k4[3], q[3];
    flow.eval(p.data(), k1);
    for (int i = 0; i < 3; ++i) q[i] = p[i] + 0.5 * h * k1[i];
    flow.eval(q, k2);
    for (int i = 0; i < 3; ++i) q[i] = p[i] + 0.5 * h * k2[i];
    flow.eval(q, k3);
    for (int i = 0; i < 3; ++i) q[i] = p[i] + h * k3[i];
    flow.eval(q, k4);
    for (int i = 0; i < 3; ++i) p[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return p;
}

namespace {

struct Crossing {
  double time;
  Vec3 point;
};

// Marches from u along the flow in one direction collecting level-function
// sign changes; stops when the state leaves the validity region or the
// inflated window, or the span bound is hit. Near the validity boundary
// the step is refined so crossings just inside it are not skipped.
void march_direction(const FoliationCut& cut, const Vec3& u, double dir,
                     std::vector<Crossing>& out, bool stop_at_first) {
  const Box probe_box = cut.window.shrunk(2.4);  // inflated marching region
  Vec3 state = u;
  double lev = cut.surface.level(state);
  double s = 0;
  double h = dir * cut.probe_step;
  int shrink_level = 0;
  while (std::fabs(s) < cut.max_span) {
    Vec3 next = cut.flow_state(state, h);
    if (!cut.surface.valid(next) || !probe_box.contains(next.data())) {
      if (shrink_level >= 8) return;
      h *= 0.25;
      ++shrink_level;
      continue;
    }
    const double lev_next = cut.surface.level(next);
    if ((lev > 0) != (lev_next > 0)) {
      // bisect within [state, next]
      Vec3 a = state;
      double la = lev, ta = 0, tb = h;
      for (int it = 0; it < 45; ++it) {
        const double tm = 0.5 * (ta + tb);
        const Vec3 mid = cut.flow_state(a, tm - ta);
        const double lm = cut.surface.level(mid);
        if ((la > 0) == (lm > 0)) {
          a = mid;
          la = lm;
          ta = tm;
        } else {
          tb = tm;
        }
      }
      Crossing c;
      c.time = s + 0.5 * (ta + tb);
      c.point = cut.flow_state(a, 0.5 * (ta + tb) - ta);
      out.push_back(c);
      if (stop_at_first) return;
    }
    state = next;
    lev = lev_next;
    s += h;
  }
}

}  // namespace

ProjectResult FoliationCut::project(const Vec3& u) const {
  if (!surface.valid(u))
    throw NumericsError("foliation cut: query point outside the surface validity region");
  if (std::fabs(surface.level(u)) < 1e-13) return {u, 0.0};

  // Interleaved marching in both flow directions; the first sign change hit
  // is the nearest crossing up to one probe step, so the other direction
  // never walks the full span.
  const Box probe_box = window.shrunk(2.4);
  struct Walker {
    Vec3 state;
    double lev;
    double s = 0;
    double h;
    bool active = true;
  };
  Walker w[2] = {{u, surface.level(u), 0, +probe_step, true},
                 {u, surface.level(u), 0, -probe_step, true}};
  while (w[0].active || w[1].active) {
    for (Walker& walk : w) {
      if (!walk.active) continue;
      if (std::fabs(walk.s) >= max_span) {
        walk.active = false;
        continue;
      }
      const Vec3 next = flow_state(walk.state, walk.h);
      if (!surface.valid(next) || !probe_box.contains(next.data())) {
        walk.active = false;
        continue;
      }
      const double lev_next = surface.level(next);
      if ((walk.lev > 0) != (lev_next > 0)) {
        Vec3 a = walk.state;
        double la = walk.lev, ta = 0, tb = walk.h;
        for (int it = 0; it < 45; ++it) {
          const double tm = 0.5 * (ta + tb);
          const Vec3 mid = flow_state(a, tm - ta);
          const double lm = surface.level(mid);
          if ((la > 0) == (lm > 0)) {
            a = mid;
            la = lm;
            ta = tm;
          } else {
            tb = tm;
          }
        }
        const double t_hit = walk.s + 0.5 * (ta + tb);
        return {flow_state(a, 0.5 * (ta + tb) - ta), t_hit};
      }
      walk.state = next;
      walk.lev = lev_next;
      walk.s += walk.h;
    }
  }
  std::ostringstream msg;
  msg << "foliation cut: leaf through (" << u[0] << ", " << u[1] << ", " << u[2]
      << ") does not reach the cut surface within the window";
  throw NumericsError(msg.str());
}

int FoliationCut::count_crossings(const Vec3& u) const {
  std::vector<Crossing> plus, minus;
  march_direction(*this, u, +1.0, plus, false);
  march_direction(*this, u, -1.0, minus, false);
  int n = 0;
  const bool on_surface = std::fabs(surface.level(u)) < 1e-13;
  bool counted_start = false;
  for (const auto& list : {plus, minus})
    for (const auto& c : list) {
      if (on_surface && std::fabs(c.time) <= probe_step) {
        counted_start = true;  // the start point itself, found by one march
        continue;
      }
      ++n;
    }
  if (on_surface || counted_start) ++n;
  return n;
}

FoliationCut build_cut(const geom::VectorField& flow, const SurfacePatch& surface,
                       const Box& window, const CutOptions& options) {
  Box win = window;
  std::string last_error;
  for (int attempt = 0; attempt <= options.window_shrinks; ++attempt) {
    FoliationCut cut;
    cut.window = win;
    cut.flow = flow;
    cut.surface = surface;
    cut.probe_step = win.diameter() / options.line_probes;
    cut.max_span = 2.5 * win.diameter();
    try {
      // (i) projection restricted to S is the identity, and S is transversal
      const int n = options.surface_samples;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double a = surface.param_domain.lo[0] +
                           surface.param_domain.extent(0) * (i + 0.5) / n;
          const double b = surface.param_domain.lo[1] +
                           surface.param_domain.extent(1) * (j + 0.5) / n;
          const Vec3 s = surface.param(a, b);
          if (!win.contains(s.data())) continue;
          double grad_lev[3];
          {
            const double h = 1e-6 * std::max(1.0, win.diameter());
            for (int c = 0; c < 3; ++c) {
              Vec3 sp = s, sm = s;
              sp[c] += h;
              sm[c] -= h;
              grad_lev[c] = (surface.level(sp) - surface.level(sm)) / (2 * h);
            }
          }
          double xv[3];
          flow.eval(s.data(), xv);
          const double pairing = grad_lev[0] * xv[0] + grad_lev[1] * xv[1] + grad_lev[2] * xv[2];
          const double scale = std::hypot(std::hypot(grad_lev[0], grad_lev[1]), grad_lev[2]) *
                               std::hypot(std::hypot(xv[0], xv[1]), xv[2]);
          if (std::fabs(pairing) < 1e-8 * std::max(1e-12, scale)) {
            std::ostringstream msg;
            msg << "build_cut: surface tangent to the flow at (" << s[0] << ", " << s[1] << ", "
                << s[2] << ")";
            throw NumericsError(msg.str());
          }
          const ProjectResult pr = cut.project(s);
          const double drift = std::hypot(std::hypot(pr.point[0] - s[0], pr.point[1] - s[1]),
                                          pr.point[2] - s[2]);
          if (std::fabs(pr.flow_time) > 1e-6 * cut.max_span || drift > 1e-6 * win.diameter())
            throw NumericsError("build_cut: projection is not the identity on the surface");
        }

      // (ii) kernel of Tp is the flow direction, (iii) single crossing
      const int probes = 5;
      for (int i = 0; i < probes; ++i)
        for (int j = 0; j < probes; ++j)
          for (int k = 0; k < probes; ++k) {
            Vec3 u;
            u[0] = win.lo[0] + win.extent(0) * (i + 0.5) / probes;
            u[1] = win.lo[1] + win.extent(1) * (j + 0.5) / probes;
            u[2] = win.lo[2] + win.extent(2) * (k + 0.5) / probes;
            if (!surface.valid(u)) continue;
            const int crossings = cut.count_crossings(u);
            if (crossings == 0) {
              std::ostringstream msg;
              msg << "build_cut: leaf through (" << u[0] << ", " << u[1] << ", " << u[2]
                  << ") never meets the surface";
              throw NumericsError(msg.str());
            }
            if (crossings > 1) {
              std::ostringstream msg;
              msg << "build_cut: leaf through (" << u[0] << ", " << u[1] << ", " << u[2]
                  << ") meets the surface " << crossings << " times";
              throw NumericsError(msg.str());
            }
            // kernel check: projecting along the flow does not move the image
            const ProjectResult p0 = cut.project(u);
            double xv[3];
            flow.eval(u.data(), xv);
            const double nrm = std::hypot(std::hypot(xv[0], xv[1]), xv[2]);
            if (nrm < 1e-12) throw NumericsError("build_cut: flow vanishes inside the window");
            const double eps = 1e-3 * win.diameter();
            Vec3 u2 = u;
            for (int c = 0; c < 3; ++c) u2[c] += eps * xv[c] / nrm;
            if (surface.valid(u2) && win.contains(u2.data())) {
              const ProjectResult p1 = cut.project(u2);
              const double drift =
                  std::hypot(std::hypot(p1.point[0] - p0.point[0], p1.point[1] - p0.point[1]),
                             p1.point[2] - p0.point[2]);
              if (drift > options.kernel_tol * std::max(1.0, win.diameter()) * 10)
                throw NumericsError("build_cut: flow direction is not in the kernel of Tp");
            }
          }
      return cut;
    } catch (const NumericsError& err) {
      last_error = err.what();
      win = win.shrunk(0.7);
    }
  }
  throw NumericsError("build_cut: window shrinking exhausted; last failure: " + last_error);
}

// ---------------------------------------------------------------------------
// Transport

void TransportedForm::eval_grid(const double* p, double* out) const {
  const int nx = dims.nx, nt = dims.nt, ny = dims.ny;
  auto clamp_idx = [](double w, int n) {
    const double c = std::clamp(w, 0.0, static_cast<double>(n - 1) - 1e-12);
    return std::pair<int, double>(static_cast<int>(c), c - static_cast<int>(c));
  };
  const auto [i, wx] = clamp_idx((p[0] - box.lo[0]) / box.extent(0) * (nx - 1), nx);
  const auto [j, wt] = clamp_idx((p[1] - box.lo[1]) / box.extent(1) * (nt - 1), nt);
  const auto [k, wy] = clamp_idx((p[2] - box.lo[2]) / box.extent(2) * (ny - 1), ny);
  auto node = [&](int a, int b, int c) {
    return &coeffs[3 * (static_cast<std::size_t>(c) * nx * nt + static_cast<std::size_t>(b) * nx +
                        a)];
  };
  for (int comp = 0; comp < 3; ++comp) {
    double acc = 0;
    for (int dk = 0; dk < 2; ++dk)
      for (int dj = 0; dj < 2; ++dj)
        for (int di = 0; di < 2; ++di) {
          const double w = (di ? wx : 1 - wx) * (dj ? wt : 1 - wt) * (dk ? wy : 1 - wy);
          acc += w * node(i + di, j + dj, k + dk)[comp];
        }
    out[comp] = acc;
  }
}

geom::FormField TransportedForm::grid_form() const {
  geom::FormField f;
  f.dim = 3;
  f.degree = 1;
  f.domain = box;
  const TransportedForm self = *this;
  f.coeffs = [self](const double* p, double* out) { self.eval_grid(p, out); };
  return f;
}

geom::FormField TransportedForm::exact_form(double jet_step) const {
  geom::FormField f;
  f.dim = 3;
  f.degree = 1;
  f.domain = box;
  f.fd_step = jet_step;
  const auto fn = exact;
  f.coeffs = [fn](const double* p, double* out) { fn(p, out); };
  return f;
}

namespace {

struct TransportState {
  Vec3 pos;
  double m[9];  // tangent flow
  double a[3];  // pulled-back coefficients
};

void transport_rhs(const geom::VectorField& flow, const geom::FormField* beta,
                   const ScalarField& gamma, const TransportState& st, TransportState& d) {
  double xv[3], jx[9];
  flow.eval(st.pos.data(), xv);
  flow.eval_jacobian(st.pos.data(), jx);
  for (int i = 0; i < 3; ++i) d.pos[i] = xv[i];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += jx[i * 3 + k] * st.m[k * 3 + j];
      d.m[i * 3 + j] = s;
    }
  // eta = beta + d(gamma)
  double eta[3];
  gamma.eval_gradient(st.pos.data(), 3, eta);
  if (beta) {
    double bc[3];
    beta->eval(st.pos.data(), bc);
    for (int i = 0; i < 3; ++i) eta[i] += bc[i];
  }
  for (int i = 0; i < 3; ++i) {
    double s = 0;
    for (int j = 0; j < 3; ++j) s += eta[j] * st.m[j * 3 + i];
    d.a[i] = s;
  }
}

void invert3(const double* m, double* inv) {
  const double a = m[0], b = m[1], c = m[2], d = m[3], e = m[4], f = m[5], g = m[6], h = m[7],
               i = m[8];
  const double det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  if (std::fabs(det) < 1e-300) throw NumericsError("transport: singular tangent flow");
  const double r = 1.0 / det;
  inv[0] = (e * i - f * h) * r;
  inv[1] = (c * h - b * i) * r;
  inv[2] = (b * f - c * e) * r;
  inv[3] = (f * g - d * i) * r;
  inv[4] = (a * i - c * g) * r;
  inv[5] = (c * d - a * f) * r;
  inv[6] = (d * h - e * g) * r;
  inv[7] = (b * g - a * h) * r;
  inv[8] = (a * e - b * d) * r;
}

// Initial covector on the surface from the splitting T_s U = T_s S + R X:
// alpha(e1) = delta(e1), alpha(e2) = delta(e2), alpha(X) = gamma(s).
void surface_initial_value(const FoliationCut& cut, const ScalarField& gamma,
                           const geom::FormField& delta, const Vec3& s, double* alpha0) {
  double grad_lev[3];
  const double h = 1e-6;
  for (int c = 0; c < 3; ++c) {
    Vec3 sp = s, sm = s;
    sp[c] += h;
    sm[c] -= h;
    grad_lev[c] = (cut.surface.level(sp) - cut.surface.level(sm)) / (2 * h);
  }
  const double gn = std::hypot(std::hypot(grad_lev[0], grad_lev[1]), grad_lev[2]);
  if (gn < 1e-12) throw NumericsError("transport: degenerate surface normal");
  for (double& g : grad_lev) g /= gn;
  // two tangent vectors: coordinate axes with the normal component removed
  double basis[2][3];
  int found = 0;
  for (int axis = 0; axis < 3 && found < 2; ++axis) {
    double v[3] = {0, 0, 0};
    v[axis] = 1;
    double dot = v[0] * grad_lev[0] + v[1] * grad_lev[1] + v[2] * grad_lev[2];
    for (int c = 0; c < 3; ++c) v[c] -= dot * grad_lev[c];
    double n = std::hypot(std::hypot(v[0], v[1]), v[2]);
    if (n < 0.3) continue;
    for (int c = 0; c < 3; ++c) v[c] /= n;
    if (found == 1) {
      double d01 = v[0] * basis[0][0] + v[1] * basis[0][1] + v[2] * basis[0][2];
      for (int c = 0; c < 3; ++c) v[c] -= d01 * basis[0][c];
      n = std::hypot(std::hypot(v[0], v[1]), v[2]);
      if (n < 0.3) continue;
      for (int c = 0; c < 3; ++c) v[c] /= n;
    }
    for (int c = 0; c < 3; ++c) basis[found][c] = v[c];
    ++found;
  }
  if (found < 2) throw NumericsError("transport: failed to build surface tangent basis");
  double xv[3];
  cut.flow.eval(s.data(), xv);
  double mat[9] = {basis[0][0], basis[0][1], basis[0][2], basis[1][0], basis[1][1],
                   basis[1][2], xv[0],       xv[1],       xv[2]};
  double dc[3];
  delta.eval(s.data(), dc);
  const double rhs[3] = {dc[0] * basis[0][0] + dc[1] * basis[0][1] + dc[2] * basis[0][2],
                         dc[0] * basis[1][0] + dc[1] * basis[1][1] + dc[2] * basis[1][2],
                         gamma.value(s.data())};
  double inv[9];
  invert3(mat, inv);
  // mat * alpha0 = rhs with rows as listed
  for (int c = 0; c < 3; ++c)
    alpha0[c] = inv[c * 3 + 0] * rhs[0] + inv[c * 3 + 1] * rhs[1] + inv[c * 3 + 2] * rhs[2];
}

}  // namespace

TransportedForm transport_solve(const FoliationCut& cut, const geom::FormField* beta,
                                const ScalarField& gamma, const geom::FormField& delta,
                                const Box& grid_box, const GridDims& dims,
                                const TransportOptions& options) {
  TransportedForm out;
  out.box = grid_box;
  out.dims = dims;

  const FoliationCut cut_copy = cut;
  const ScalarField gamma_copy = gamma;
  const geom::FormField delta_copy = delta;
  const bool has_beta = beta != nullptr;
  const geom::FormField beta_copy = has_beta ? *beta : geom::FormField{};
  const int line_nodes = options.line_nodes;

  // line_nodes fixes the step density: a full-window line gets that many
  // nodes, shorter flow segments keep the same step size.
  const double step_ref = cut.window.diameter() / std::max(1, line_nodes - 1);
  out.exact = [cut_copy, gamma_copy, delta_copy, has_beta, beta_copy,
               step_ref](const double* p, double* coeffs_out) {
    const Vec3 u{p[0], p[1], p[2]};
    const ProjectResult pr = cut_copy.project(u);
    TransportState st;
    st.pos = pr.point;
    for (int i = 0; i < 9; ++i) st.m[i] = (i % 4 == 0) ? 1.0 : 0.0;
    surface_initial_value(cut_copy, gamma_copy, delta_copy, pr.point, st.a);
    const double tau = -pr.flow_time;  // flow from the surface back to u
    const int steps = std::max(4, static_cast<int>(std::ceil(std::fabs(tau) / step_ref)));
    const double h = tau / steps;
    const geom::FormField* bptr = has_beta ? &beta_copy : nullptr;
    if (std::fabs(tau) > 1e-14) {
      for (int k = 0; k < steps; ++k) {
        TransportState k1, k2, k3, k4, q;
        auto advance = [&](const TransportState& base, const TransportState& slope, double f,
                           TransportState& res) {
          for (int i = 0; i < 3; ++i) res.pos[i] = base.pos[i] + f * slope.pos[i];
          for (int i = 0; i < 9; ++i) res.m[i] = base.m[i] + f * slope.m[i];
          for (int i = 0; i < 3; ++i) res.a[i] = base.a[i] + f * slope.a[i];
        };
        transport_rhs(cut_copy.flow, bptr, gamma_copy, st, k1);
        advance(st, k1, 0.5 * h, q);
        transport_rhs(cut_copy.flow, bptr, gamma_copy, q, k2);
        advance(st, k2, 0.5 * h, q);
        transport_rhs(cut_copy.flow, bptr, gamma_copy, q, k3);
        advance(st, k3, h, q);
        transport_rhs(cut_copy.flow, bptr, gamma_copy, q, k4);
        for (int i = 0; i < 3; ++i)
          st.pos[i] += h / 6.0 * (k1.pos[i] + 2 * k2.pos[i] + 2 * k3.pos[i] + k4.pos[i]);
        for (int i = 0; i < 9; ++i)
          st.m[i] += h / 6.0 * (k1.m[i] + 2 * k2.m[i] + 2 * k3.m[i] + k4.m[i]);
        for (int i = 0; i < 3; ++i)
          st.a[i] += h / 6.0 * (k1.a[i] + 2 * k2.a[i] + 2 * k3.a[i] + k4.a[i]);
      }
    }
    double minv[9];
    invert3(st.m, minv);
    // alpha(u) = A o M^{-1}
    for (int c = 0; c < 3; ++c)
      coeffs_out[c] = st.a[0] * minv[0 * 3 + c] + st.a[1] * minv[1 * 3 + c] +
                      st.a[2] * minv[2 * 3 + c];
  };

  if (options.fill_grid) {
    const std::size_t total =
        static_cast<std::size_t>(dims.nx) * dims.nt * dims.ny;
    out.coeffs.assign(3 * total, 0.0);
    parallel_for(total, [&](std::size_t idx) {
      const int i = static_cast<int>(idx % dims.nx);
      const int j = static_cast<int>((idx / dims.nx) % dims.nt);
      const int k = static_cast<int>(idx / (static_cast<std::size_t>(dims.nx) * dims.nt));
      double p[3];
      p[0] = grid_box.lo[0] + grid_box.extent(0) * i / (dims.nx - 1);
      p[1] = grid_box.lo[1] + grid_box.extent(1) * j / (dims.nt - 1);
      p[2] = grid_box.lo[2] + grid_box.extent(2) * k / (dims.ny - 1);
      out.exact(p, &out.coeffs[3 * idx]);
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conservation-law construction

ClawResult build_conservation_law(const FoliationCut& cut1, const FoliationCut& cut2,
                                  const geom::FormField& gamma, const Box& grid_box,
                                  const ClawOptions& options) {
  // The construction needs a shared cut surface.
  {
    const Box& pd = cut1.surface.param_domain;
    for (int i = 0; i < 4; ++i) {
      const double a = pd.lo[0] + pd.extent(0) * (i + 0.5) / 4;
      const double b = pd.lo[1] + pd.extent(1) * (i + 0.5) / 4;
      const Vec3 s = cut1.surface.param(a, b);
      if (std::fabs(cut2.surface.level(s)) > 1e-9)
        throw InputError("build_conservation_law: cuts do not share the surface");
    }
  }

  ClawResult res;
  // Step 1: flow-invariant extension of gamma along the first foliation.
  const ScalarField zero = constant_field(0.0);
  TransportOptions topt;
  topt.line_nodes = options.line_nodes;
  res.beta = transport_solve(cut1, nullptr, zero, gamma, grid_box, options.dims, topt);

  // Step 2: scalar correction along the second foliation, phi = 0 on S,
  // L_X2 phi = -i_X2 beta; evaluated from grid beta for the lattice and
  // from the exact beta for validation-grade queries.
  const FoliationCut cut2_copy = cut2;
  const TransportedForm beta_copy = res.beta;
  const int phi_steps = 48;

  // phi(u) = - int of (i_X2 beta) along the fiber flow from the surface to
  // u: Simpson accumulation over RK4-marched flow nodes.
  auto phi_with = [cut2_copy, phi_steps](const std::function<void(const double*, double*)>& beta_eval,
                                         const double* p) {
    const Vec3 u{p[0], p[1], p[2]};
    const ProjectResult pr = cut2_copy.project(u);
    const double tau = -pr.flow_time;
    if (std::fabs(tau) < 1e-14) return 0.0;
    auto integrand = [&](const Vec3& q) {
      double xv[3], bc[3];
      cut2_copy.flow.eval(q.data(), xv);
      beta_eval(q.data(), bc);
      return -(bc[0] * xv[0] + bc[1] * xv[1] + bc[2] * xv[2]);
    };
    auto rk4_move = [&](const Vec3& q, double step) {
      double k1[3], k2[3], k3[3], k4[3], tmp[3];
      cut2_copy.flow.eval(q.data(), k1);
      for (int c = 0; c < 3; ++c) tmp[c] = q[c] + 0.5 * step * k1[c];
      cut2_copy.flow.eval(tmp, k2);
      for (int c = 0; c < 3; ++c) tmp[c] = q[c] + 0.5 * step * k2[c];
      cut2_copy.flow.eval(tmp, k3);
      for (int c = 0; c < 3; ++c) tmp[c] = q[c] + step * k3[c];
      cut2_copy.flow.eval(tmp, k4);
      Vec3 r;
      for (int c = 0; c < 3; ++c)
        r[c] = q[c] + step / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
      return r;
    };
    const double h = tau / phi_steps;
    Vec3 pos = pr.point;
    double phi = 0;
    for (int k = 0; k < phi_steps; ++k) {
      const Vec3 mid = rk4_move(pos, 0.5 * h);
      const Vec3 nxt = rk4_move(mid, 0.5 * h);
      phi += h / 6.0 * (integrand(pos) + 4 * integrand(mid) + integrand(nxt));
      pos = nxt;
    }
    return phi;
  };

  // Converted to std::function once; converting per call would copy the
  // captured coefficient lattice on every node.
  const std::function<void(const double*, double*)> beta_grid_eval =
      [&beta_ref = res.beta](const double* p, double* out) { beta_ref.eval_grid(p, out); };
  const std::function<void(const double*, double*)> beta_exact_eval = beta_copy.exact;

  // alpha exact evaluator: beta_exact + d(phi_exact) by central differences.
  const double jh = options.jet_step;
  res.alpha.box = grid_box;
  res.alpha.dims = options.dims;
  res.alpha.exact = [beta_exact_eval, phi_with, jh](const double* p, double* out) {
    double bc[3];
    beta_exact_eval(p, bc);
    for (int c = 0; c < 3; ++c) {
      double pp[3] = {p[0], p[1], p[2]};
      pp[c] += jh;
      const double fp = phi_with(beta_exact_eval, pp);
      pp[c] = p[c] - jh;
      const double fm = phi_with(beta_exact_eval, pp);
      out[c] = bc[c] + (fp - fm) / (2 * jh);
    }
  };

  // Grid fill: phi on the lattice from grid beta, then alpha = beta + d(phi)
  // with central differences on the lattice.
  const auto& dims = options.dims;
  const std::size_t total = static_cast<std::size_t>(dims.nx) * dims.nt * dims.ny;
  std::vector<double> phi_grid(total, 0.0);
  auto node_point = [&](int i, int j, int k) {
    Vec3 p;
    p[0] = grid_box.lo[0] + grid_box.extent(0) * i / (dims.nx - 1);
    p[1] = grid_box.lo[1] + grid_box.extent(1) * j / (dims.nt - 1);
    p[2] = grid_box.lo[2] + grid_box.extent(2) * k / (dims.ny - 1);
    return p;
  };
  parallel_for(total, [&](std::size_t idx) {
    const int i = static_cast<int>(idx % dims.nx);
    const int j = static_cast<int>((idx / dims.nx) % dims.nt);
    const int k = static_cast<int>(idx / (static_cast<std::size_t>(dims.nx) * dims.nt));
    const Vec3 p = node_point(i, j, k);
    phi_grid[idx] = phi_with(beta_grid_eval, p.data());
  });
  res.alpha.coeffs.assign(3 * total, 0.0);
  const double hx = grid_box.extent(0) / (dims.nx - 1);
  const double ht = grid_box.extent(1) / (dims.nt - 1);
  const double hy = grid_box.extent(2) / (dims.ny - 1);
  auto phi_at = [&](int i, int j, int k) {
    return phi_grid[static_cast<std::size_t>(k) * dims.nx * dims.nt +
                    static_cast<std::size_t>(j) * dims.nx + i];
  };
  auto dcentral = [&](int idx, int n, double h, const std::function<double(int)>& f) {
    if (idx > 0 && idx < n - 1) return (f(idx + 1) - f(idx - 1)) / (2 * h);
    if (idx == 0) return (-3 * f(0) + 4 * f(1) - f(2)) / (2 * h);
    return (3 * f(n - 1) - 4 * f(n - 2) + f(n - 3)) / (2 * h);
  };
  parallel_for(total, [&](std::size_t idx) {
    const int i = static_cast<int>(idx % dims.nx);
    const int j = static_cast<int>((idx / dims.nx) % dims.nt);
    const int k = static_cast<int>(idx / (static_cast<std::size_t>(dims.nx) * dims.nt));
    double dphi[3];
    dphi[0] = dcentral(i, dims.nx, hx, [&](int a) { return phi_at(a, j, k); });
    dphi[1] = dcentral(j, dims.nt, ht, [&](int a) { return phi_at(i, a, k); });
    dphi[2] = dcentral(k, dims.ny, hy, [&](int a) { return phi_at(i, j, a); });
    for (int c = 0; c < 3; ++c)
      res.alpha.coeffs[3 * idx + c] = res.beta.coeffs[3 * idx + c] + dphi[c];
  });

  // Validation on the constructed lattice: d(alpha) by central differences
  // of the coefficient grid, then the two contraction residuals and the
  // nondegeneracy sampling at random interior points. (The per-point
  // shooting evaluator stays available for spot checks; differencing
  // through it at every validation point would be prohibitively slow.)
  TransportedForm dalpha;
  dalpha.box = grid_box;
  dalpha.dims = dims;
  dalpha.coeffs.assign(3 * total, 0.0);
  auto coeff_at = [&](int c, int i, int j, int k) {
    return res.alpha.coeffs[3 * (static_cast<std::size_t>(k) * dims.nx * dims.nt +
                                 static_cast<std::size_t>(j) * dims.nx + i) +
                            c];
  };
  parallel_for(total, [&](std::size_t idx) {
    const int i = static_cast<int>(idx % dims.nx);
    const int j = static_cast<int>((idx / dims.nx) % dims.nt);
    const int k = static_cast<int>(idx / (static_cast<std::size_t>(dims.nx) * dims.nt));
    // lex 2-form coefficients: (xt, xy, ty)
    const double dxt = dcentral(i, dims.nx, hx, [&](int a) { return coeff_at(1, a, j, k); }) -
                       dcentral(j, dims.nt, ht, [&](int a) { return coeff_at(0, i, a, k); });
    const double dxy = dcentral(i, dims.nx, hx, [&](int a) { return coeff_at(2, a, j, k); }) -
                       dcentral(k, dims.ny, hy, [&](int a) { return coeff_at(0, i, j, a); });
    const double dty = dcentral(j, dims.nt, ht, [&](int a) { return coeff_at(2, i, a, k); }) -
                       dcentral(k, dims.ny, hy, [&](int a) { return coeff_at(1, i, j, a); });
    dalpha.coeffs[3 * idx + 0] = dxt;
    dalpha.coeffs[3 * idx + 1] = dxy;
    dalpha.coeffs[3 * idx + 2] = dty;
  });

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(0.12, 0.88);
  double max2 = 0, max1 = 0, mind = std::numeric_limits<double>::infinity();
  for (int sample = 0; sample < options.validation_samples; ++sample) {
    double p[3];
    for (int c = 0; c < 3; ++c) p[c] = grid_box.lo[c] + grid_box.extent(c) * unif(rng);
    double ac[3], da[3], x1[3], x2[3];
    res.alpha.eval_grid(p, ac);
    dalpha.eval_grid(p, da);
    cut1.flow.eval(p, x1);
    cut2.flow.eval(p, x2);
    const double i2 = ac[0] * x2[0] + ac[1] * x2[1] + ac[2] * x2[2];
    // i_X1 d(alpha) from 2-form coefficients (xt, xy, ty)
    const double i1[3] = {-x1[1] * da[0] - x1[2] * da[1], x1[0] * da[0] - x1[2] * da[2],
                          x1[0] * da[1] + x1[1] * da[2]};
    max2 = std::max(max2, std::fabs(i2));
    max1 = std::max(max1, std::max({std::fabs(i1[0]), std::fabs(i1[1]), std::fabs(i1[2])}));
    mind = std::min(mind, std::hypot(std::hypot(da[0], da[1]), da[2]));
  }
  res.max_ix2_alpha = max2;
  res.max_ix1_dalpha = max1;
  res.min_dalpha_norm = mind;
  res.nondegenerate = mind > 1e-8;
  if (max2 > options.tol || max1 > options.tol) {
    std::ostringstream msg;
    msg << "build_conservation_law: validation residuals above tolerance (i_X2 alpha = " << max2
        << ", i_X1 d(alpha) = " << max1 << ")";
    throw NumericsError(msg.str());
  }
  return res;
}

}  // namespace charentropy::claws

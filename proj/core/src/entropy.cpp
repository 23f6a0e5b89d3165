#include "charentropy/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace charentropy::entropy {

// ---------------------------------------------------------------------------
// Test functions

double TestFunction::value(const double* p) const {
  const int d = dim();
  double r2 = 0;
  for (int i = 0; i < d; ++i) r2 += sq((p[i] - center[i]) / radii[i]);
  if (r2 >= 1.0) return 0.0;
  return amplitude * std::exp(1.0 - 1.0 / (1.0 - r2));
}

void TestFunction::grad(const double* p, double* out) const {
  const int d = dim();
  double r2 = 0;
  for (int i = 0; i < d; ++i) r2 += sq((p[i] - center[i]) / radii[i]);
  if (r2 >= 1.0) {
    for (int i = 0; i < d; ++i) out[i] = 0;
    return;
  }
  const double v = amplitude * std::exp(1.0 - 1.0 / (1.0 - r2));
  const double denom = sq(1.0 - r2);
  for (int i = 0; i < d; ++i)
    out[i] = -v * 2.0 * (p[i] - center[i]) / (sq(radii[i]) * denom);
}

Box TestFunction::support() const {
  Box b;
  b.dim = dim();
  for (int i = 0; i < b.dim; ++i) {
    b.lo[i] = center[i] - radii[i];
    b.hi[i] = center[i] + radii[i];
  }
  return b;
}

TestFunction make_base_bump(double cx, double ct, double rx, double rt, double amplitude) {
  TestFunction f;
  f.kind = TestFunction::Kind::kBumpOnBase;
  f.center = {cx, ct, 0};
  f.radii = {rx, rt, 1};
  f.amplitude = amplitude;
  return f;
}

TestFunction make_total_bump(double cx, double ct, double cy, double rx, double rt, double ry,
                             double amplitude) {
  TestFunction f;
  f.kind = TestFunction::Kind::kBumpOnTotal;
  f.center = {cx, ct, cy};
  f.radii = {rx, rt, ry};
  f.amplitude = amplitude;
  return f;
}

// ---------------------------------------------------------------------------
// Cell decomposition

namespace {

struct PieceMoments {
  double area = 0, mx = 0, mt = 0;
};

// Moments of the region { x0 <= x <= clamp(curve(t), x0, x1) } over [a, b],
// with the curve linear on [a, b].
PieceMoments left_strip_moments(double x0, double x1, double a, double b, double ca, double cb) {
  PieceMoments m;
  auto cl = [&](double t) {
    const double w = (t - a) / (b - a);
    return std::clamp(ca + w * (cb - ca), x0, x1);
  };
  const double mid = 0.5 * (a + b);
  const double c_a = cl(a), c_m = cl(mid), c_b = cl(b);
  const double h = b - a;
  m.area = h / 6.0 * ((c_a - x0) + 4 * (c_m - x0) + (c_b - x0));
  m.mt = h / 6.0 * (a * (c_a - x0) + 4 * mid * (c_m - x0) + b * (c_b - x0));
  m.mx = h / 12.0 * ((c_a * c_a - x0 * x0) + 4 * (c_m * c_m - x0 * x0) + (c_b * c_b - x0 * x0));
  return m;
}

}  // namespace

void for_each_cell_piece(const PiecewiseSection& s, const Box& box,
                         const std::function<void(const CellPiece&)>& fn) {
  if (s.xs.size() < 2 || s.ts.size() < 2) throw InputError("quadrature: section grid too small");
  const std::size_t nx = s.xs.size(), nt = s.ts.size();
  const double dx = s.xs[1] - s.xs[0], dt = s.ts[1] - s.ts[0];
  std::size_t i0 = 0, i1 = nx - 1, j0 = 0, j1 = nt - 1;
  i0 = static_cast<std::size_t>(std::max(0.0, std::floor((box.lo[0] - s.xs[0]) / dx)));
  i1 = static_cast<std::size_t>(
      std::min<double>(nx - 1, std::ceil((box.hi[0] - s.xs[0]) / dx) + 1));
  j0 = static_cast<std::size_t>(std::max(0.0, std::floor((box.lo[1] - s.ts[0]) / dt)));
  j1 = static_cast<std::size_t>(
      std::min<double>(nt - 1, std::ceil((box.hi[1] - s.ts[0]) / dt) + 1));

  for (std::size_t j = j0; j + 1 <= j1 && j + 1 < nt; ++j) {
    const double t0 = s.ts[j], t1 = s.ts[j + 1];
    for (std::size_t i = i0; i + 1 <= i1 && i + 1 < nx; ++i) {
      const double x0 = s.xs[i], x1 = s.xs[i + 1];
      const model::JumpCurve* jc = s.cell_jump(i, j);
      const double cell_area = (x1 - x0) * (t1 - t0);
      if (!jc) {
        CellPiece p;
        p.centroid = {0.5 * (x0 + x1), 0.5 * (t0 + t1)};
        p.area = cell_area;
        fn(p);
        continue;
      }
      // Breakpoints: polyline vertices plus clamp crossings.
      std::vector<double> bps = {t0, t1};
      for (double tv : jc->t)
        if (tv > t0 && tv < t1) bps.push_back(tv);
      std::sort(bps.begin(), bps.end());
      std::vector<double> refined;
      for (std::size_t k = 0; k + 1 < bps.size(); ++k) {
        const double a = bps[k], b = bps[k + 1];
        refined.push_back(a);
        const double ca = jc->covers(a) ? jc->x_at(a) : jc->x.front();
        const double cb = jc->covers(b) ? jc->x_at(b) : jc->x.back();
        for (const double edge : {x0, x1}) {
          if ((ca - edge) * (cb - edge) < 0) {
            const double w = (edge - ca) / (cb - ca);
            refined.push_back(a + w * (b - a));
          }
        }
      }
      refined.push_back(bps.back());
      std::sort(refined.begin(), refined.end());

      PieceMoments left;
      for (std::size_t k = 0; k + 1 < refined.size(); ++k) {
        const double a = refined[k], b = refined[k + 1];
        if (b - a < 1e-300) continue;
        const double ca = jc->covers(a) ? jc->x_at(a) : (a < jc->t.front() ? jc->x.front()
                                                                           : jc->x.back());
        const double cb = jc->covers(b) ? jc->x_at(b) : (b < jc->t.front() ? jc->x.front()
                                                                           : jc->x.back());
        const PieceMoments mm = left_strip_moments(x0, x1, a, b, ca, cb);
        left.area += mm.area;
        left.mx += mm.mx;
        left.mt += mm.mt;
      }
      const double eps = 1e-12 * cell_area;
      const double right_area = cell_area - left.area;
      if (left.area > eps) {
        CellPiece p;
        p.area = left.area;
        p.centroid = {left.mx / left.area, left.mt / left.area};
        p.side = -1;
        p.jump = jc;
        fn(p);
      }
      if (right_area > eps) {
        CellPiece p;
        p.area = right_area;
        const double ccx = 0.5 * (x0 + x1), cct = 0.5 * (t0 + t1);
        p.centroid = {(cell_area * ccx - left.mx) / right_area,
                      (cell_area * cct - left.mt) / right_area};
        p.side = +1;
        p.jump = jc;
        fn(p);
      }
    }
  }
}

double piece_value(const PiecewiseSection& s, const CellPiece& piece) {
  if (piece.side == 0) return s.eval(piece.centroid[0], piece.centroid[1]);
  return s.eval_side(piece.centroid[0], piece.centroid[1], *piece.jump, piece.side);
}

double integrate_fiber(const std::function<double(double)>& f, double a, double b, double kink,
                       int nodes) {
  if (!(b > a)) return 0.0;
  auto simpson = [&](double lo, double hi, int n) {
    if (!(hi > lo)) return 0.0;
    if (n % 2 == 1) ++n;
    n = std::max(4, n);
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int k = 1; k < n; ++k) s += f(lo + k * h) * (k % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  if (kink > a && kink < b) {
    const int na = std::max(4, static_cast<int>(nodes * (kink - a) / (b - a)));
    const int nb = std::max(4, nodes - na);
    return simpson(a, kink, na) + simpson(kink, b, nb);
  }
  return simpson(a, b, nodes);
}

// ---------------------------------------------------------------------------
// Kruzhkov flux

Vec2 kruzhkov_R(const FluxModel& m, const Vec2& z, double u, double y) {
  double zu[2], zy[2];
  m.eval_flux(z.data(), u, zu);
  m.eval_flux(z.data(), y, zy);
  const double s = sgn(u - y);
  return {s * (zu[0] - zy[0]), s * (zu[1] - zy[1])};
}

Vec2 fiber_flux_integral(const FluxModel& m, const Vec2& z, double a, double b,
                         const ScalarField& weight, int panels) {
  // 8-point Gauss-Legendre per panel
  static const double gx[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                               0.9602898564975363};
  static const double gw[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                               0.1012285362903763};
  Vec2 acc{0, 0};
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h, mid = lo + 0.5 * h, half = 0.5 * h;
    for (int g = 0; g < 4; ++g) {
      for (const double sgn_g : {-1.0, 1.0}) {
        const double y = mid + sgn_g * half * gx[g];
        double dzy[2];
        m.eval_flux_dy(z.data(), y, dzy);
        const double pt[3] = {z[0], z[1], y};
        const double w = weight.value(pt);
        acc[0] += gw[g] * half * w * dzy[0];
        acc[1] += gw[g] * half * w * dzy[1];
      }
    }
  }
  return acc;
}

SampledBaseField S_operator(const FluxModel& m, const PiecewiseSection& s,
                            const TestFunction& theta, const Layer* layer, int fiber_nodes) {
  if (theta.kind != TestFunction::Kind::kBumpOnTotal)
    throw InputError("S_operator: theta must be a total-space test density");
  const Box supp = theta.support();
  const double ylo = supp.lo[2], yhi = supp.hi[2];
  Layer g = layer ? *layer : model::default_layer(s);
  SampledBaseField out;
  for (std::size_t j = 0; j < s.ts.size(); ++j) {
    if (s.ts[j] < supp.lo[1] || s.ts[j] > supp.hi[1]) continue;
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (s.xs[i] < supp.lo[0] || s.xs[i] > supp.hi[0]) continue;
      const Vec2 z{s.xs[i], s.ts[j]};
      if (ylo < g.lower(z.data()) || yhi > g.upper(z.data()))
        throw InputError("S_operator: theta support exits the layer");
      const double u = s.at(i, j);
      Vec2 val{0, 0};
      for (int comp = 0; comp < 2; ++comp) {
        val[comp] = integrate_fiber(
            [&](double y) {
              const Vec2 r = kruzhkov_R(m, z, u, y);
              const double p[3] = {z[0], z[1], y};
              return r[comp] * theta.value(p);
            },
            ylo, yhi, u, fiber_nodes);
      }
      out.points.push_back(z);
      out.values.push_back(val);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Residuals

double weak_rh_residual(const FluxModel& m, const PiecewiseSection& s, const TestFunction& phi) {
  if (phi.kind != TestFunction::Kind::kBumpOnBase)
    throw InputError("weak_rh_residual: phi must be a base test function");
  const Box supp = phi.support();
  if (supp.lo[0] < s.xs.front() || supp.hi[0] > s.xs.back() || supp.lo[1] < s.ts.front() ||
      supp.hi[1] > s.ts.back())
    throw InputError("weak_rh_residual: test support overlaps the grid boundary");
  std::vector<double> contrib;
  contrib.reserve(1024);
  for_each_cell_piece(s, supp, [&](const CellPiece& piece) {
    const double u = piece_value(s, piece);
    const double* z = piece.centroid.data();
    double zf[2], gphi[2];
    m.eval_flux(z, u, zf);
    phi.grad(z, gphi);
    const double src = m.eval_source(z, u);
    contrib.push_back(-(zf[0] * gphi[0] + zf[1] * gphi[1] - src * phi.value(z)) * piece.area);
  });
  double acc = 0;
  for (double c : contrib) acc += c;
  return acc;
}

namespace {

template <class Value, class Grad>
double entropy_residual_impl(const FluxModel& m, const PiecewiseSection& s, const Box& supp,
                             Value&& psi_value, Grad&& psi_grad, int fiber_nodes) {
  const double ylo = supp.lo[2], yhi = supp.hi[2];
  Box base_box = supp;
  base_box.dim = 2;
  std::vector<double> contrib;
  contrib.reserve(4096);
  for_each_cell_piece(s, base_box, [&](const CellPiece& piece) {
    const double u = piece_value(s, piece);
    const Vec2 z = piece.centroid;
    double zu[2];
    m.eval_flux(z.data(), u, zu);
    const double src_u = m.eval_source(z.data(), u);
    const double fiber = integrate_fiber(
        [&](double y) {
          const double p[3] = {z[0], z[1], y};
          double zy[2], gpsi[3];
          m.eval_flux(z.data(), y, zy);
          psi_grad(p, gpsi);
          const double div_y = m.flux_divergence(z.data(), y);
          const double bracket = -src_u - div_y;
          return sgn(u - y) * ((zu[0] - zy[0]) * gpsi[0] + (zu[1] - zy[1]) * gpsi[1] +
                               bracket * psi_value(p));
        },
        ylo, yhi, u, fiber_nodes);
    contrib.push_back(fiber * piece.area);
  });
  double acc = 0;
  for (double c : contrib) acc += c;
  return acc;
}

}  // namespace

double entropy_residual(const FluxModel& m, const PiecewiseSection& s, const TestFunction& psi,
                        int fiber_nodes, const Layer* layer) {
  if (psi.kind != TestFunction::Kind::kBumpOnTotal)
    throw InputError("entropy_residual: psi must be a total-space test function");
  if (psi.amplitude < 0)
    throw InputError("entropy_residual: psi must be nonnegative");
  (void)layer;  // advisory: fiber values beyond the layer only add divergence terms
  return entropy_residual_impl(
      m, s, psi.support(), [&](const double* p) { return psi.value(p); },
      [&](const double* p, double* g) { psi.grad(p, g); }, fiber_nodes);
}

double entropy_residual_product(const FluxModel& m, const PiecewiseSection& s,
                                const TestFunction& theta, const TestFunction& phi,
                                int fiber_nodes, const Layer* layer) {
  if (theta.kind != TestFunction::Kind::kBumpOnTotal ||
      phi.kind != TestFunction::Kind::kBumpOnBase)
    throw InputError("entropy_residual_product: expects (total theta, base phi)");
  if (theta.amplitude < 0 || phi.amplitude < 0)
    throw InputError("entropy_residual_product: tests must be nonnegative");
  Box supp = theta.support();
  const Box supp_phi = phi.support();
  supp.lo[0] = std::max(supp.lo[0], supp_phi.lo[0]);
  supp.hi[0] = std::min(supp.hi[0], supp_phi.hi[0]);
  supp.lo[1] = std::max(supp.lo[1], supp_phi.lo[1]);
  supp.hi[1] = std::min(supp.hi[1], supp_phi.hi[1]);
  if (supp.lo[0] >= supp.hi[0] || supp.lo[1] >= supp.hi[1]) return 0.0;
  (void)layer;
  return entropy_residual_impl(
      m, s, supp,
      [&](const double* p) { return theta.value(p) * phi.value(p); },
      [&](const double* p, double* g) {
        double gt[3], gp[2];
        theta.grad(p, gt);
        phi.grad(p, gp);
        const double tv = theta.value(p), pv = phi.value(p);
        g[0] = gt[0] * pv + tv * gp[0];
        g[1] = gt[1] * pv + tv * gp[1];
        g[2] = gt[2] * pv;
      },
      fiber_nodes);
}

// ---------------------------------------------------------------------------
// Jump admissibility

namespace {

JumpVerdict jump_admissibility_impl(const FluxModel& m, const JumpData& jump,
                                    const ScalarField* lambda, double tol, int k_samples) {
  m.require_m2("jump_admissibility");
  if (jump.u_left == jump.u_right)
    throw InputError("jump_admissibility: degenerate jump (u_left == u_right)");
  const double norm = std::hypot(jump.nu[0], jump.nu[1]);
  if (norm < 1e-14) throw InputError("jump_admissibility: nu must be nonzero");
  Vec2 nu{jump.nu[0] / norm, jump.nu[1] / norm};
  double ul = jump.u_left, ur = jump.u_right;
  if (nu[0] < 0) {  // normalize so nu points from the left side to the right
    nu = {-nu[0], -nu[1]};
    std::swap(ul, ur);
  }
  if (std::fabs(nu[0]) < 1e-12)
    throw NumericsError(
        "jump_admissibility: jump-curve tangent has zero time component, speed undefined");
  const double speed = -nu[1] / nu[0];

  const ScalarField unit = constant_field(1.0);
  const ScalarField& w = lambda ? *lambda : unit;

  // R(u, k) integrates the weighted fiber flux over the unoriented interval
  // |k, u|; for the unit weight this is sgn(u - k)(Z(u) - Z(k)).
  auto R = [&](double u, double k) -> Vec2 {
    if (!lambda) return kruzhkov_R(m, jump.z, u, k);
    return fiber_flux_integral(m, jump.z, std::min(k, u), std::max(k, u), w);
  };

  JumpVerdict v;
  {
    // rh_residual uses the signed integral from u_right to u_left
    const Vec2 signed_d = fiber_flux_integral(m, jump.z, ur, ul, w);
    v.rh_residual = nu[0] * signed_d[0] + nu[1] * signed_d[1];
  }

  const double klo = std::min(ul, ur), khi = std::max(ul, ur);
  double worst = std::numeric_limits<double>::infinity();
  double worst_k = klo;
  for (int i = 0; i < k_samples + 2; ++i) {
    const double k = klo + (khi - klo) * i / (k_samples + 1);
    const Vec2 rl = R(ul, k), rr = R(ur, k);
    const Vec2 dR{rr[0] - rl[0], rr[1] - rl[1]};
    const double e = -(dR[0] - speed * dR[1]);
    if (e < worst) {
      worst = e;
      worst_k = k;
    }
  }
  v.margin = worst;
  v.worst_k = worst_k;
  v.entropic = worst >= -tol;
  return v;
}

}  // namespace

JumpVerdict jump_admissibility(const FluxModel& m, const JumpData& jump, double tol,
                               int k_samples) {
  return jump_admissibility_impl(m, jump, nullptr, tol, k_samples);
}

JumpVerdict jump_admissibility_weighted(const FluxModel& m, const JumpData& jump,
                                        const ScalarField& lambda, double tol, int k_samples) {
  return jump_admissibility_impl(m, jump, &lambda, tol, k_samples);
}

// ---------------------------------------------------------------------------
// Surface/volume identity

VolpertReport volpert_identity_check(const FluxModel& m, const PiecewiseSection& s,
                                     const TestFunction& theta, const TestFunction& phi,
                                     int fiber_nodes) {
  for (const auto& jc : s.jumps)
    if (!jc.u_left || !jc.u_right)
      throw InputError("volpert_identity_check: jump curves must carry traces");
  VolpertReport rep;
  rep.lhs = entropy_residual_product(m, s, theta, phi, fiber_nodes);

  const Box supp = theta.support();
  const double ylo = supp.lo[2], yhi = supp.hi[2];
  double rhs = 0;
  for (const auto& jc : s.jumps) {
    // integrate over t along the polyline; <Delta S, nu> dH1 collapses to
    // (Delta S_x - slope * Delta S_t) dt for a t-graph curve
    for (std::size_t seg = 0; seg + 1 < jc.t.size(); ++seg) {
      const double a = jc.t[seg], b = jc.t[seg + 1];
      const int sub = std::max(8, static_cast<int>(std::ceil((b - a) / std::max(1e-9, s.dt()))));
      auto integrand = [&](double t) {
        const Vec2 z{jc.x_at(t), t};
        if (z[1] < supp.lo[1] || z[1] > supp.hi[1]) return 0.0;
        const double slope = jc.slope_at(t);
        Vec2 delta{0, 0};
        for (int comp = 0; comp < 2; ++comp) {
          const double sl = integrate_fiber(
              [&](double y) {
                const Vec2 r = kruzhkov_R(m, z, jc.u_left(t), y);
                const double p[3] = {z[0], z[1], y};
                return r[comp] * theta.value(p);
              },
              ylo, yhi, jc.u_left(t), fiber_nodes);
          const double sr = integrate_fiber(
              [&](double y) {
                const Vec2 r = kruzhkov_R(m, z, jc.u_right(t), y);
                const double p[3] = {z[0], z[1], y};
                return r[comp] * theta.value(p);
              },
              ylo, yhi, jc.u_right(t), fiber_nodes);
          delta[comp] = sr - sl;
        }
        return (delta[0] - slope * delta[1]) * phi.value(z.data());
      };
      // composite Simpson in t
      int n = sub % 2 == 1 ? sub + 1 : sub;
      const double h = (b - a) / n;
      double acc = integrand(a) + integrand(b);
      for (int k = 1; k < n; ++k) acc += integrand(a + k * h) * (k % 2 == 1 ? 4.0 : 2.0);
      rhs += -acc * h / 3.0;
    }
  }
  rep.rhs = rhs;
  rep.difference = rep.lhs - rep.rhs;
  return rep;
}

}  // namespace charentropy::entropy

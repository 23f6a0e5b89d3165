#include "charentropy/integrability.hpp"

#include <cmath>

#include "charentropy/characteristics.hpp"
#include "charentropy/support/parallel.hpp"

namespace charentropy::integrability {

namespace {

geom::VectorField fiber_field(const Box& domain) {
  geom::VectorField Y;
  Y.dim = 3;
  Y.domain = domain;
  Y.components = [](const double*, double* out) {
    out[0] = 0;
    out[1] = 0;
    out[2] = 1;
  };
  Y.jacobian = [](const double*, double* jac) {
    for (int k = 0; k < 9; ++k) jac[k] = 0;
  };
  return Y;
}

double det3(const double* a, const double* b, const double* c) {
  return a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1]) +
         c[0] * (a[1] * b[2] - a[2] * b[1]);
}

// Solve [A B e] coeffs = w for the e-coefficient (Cramer).
double complement_coefficient(const double* A, const double* B, const double* e, const double* w) {
  const double d = det3(A, B, e);
  if (std::fabs(d) < 1e-14) throw NumericsError("curvature: frame X, Y, complement is degenerate");
  return det3(A, B, w) / d;
}

}  // namespace

double reduced_bracket_coefficient(const geom::VectorField& A, const geom::VectorField& B,
                                   const Vec3& f) {
  double av[3], bv[3], br[3];
  A.eval(f.data(), av);
  B.eval(f.data(), bv);
  geom::lie_bracket(A, B, f.data(), br);
  const double cross =
      std::fabs(av[1] * bv[2] - av[2] * bv[1]) + std::fabs(av[2] * bv[0] - av[0] * bv[2]) +
      std::fabs(av[0] * bv[1] - av[1] * bv[0]);
  if (cross < 1e-12) throw NumericsError("curvature: X and Y are linearly dependent at f");
  const double ex[3] = {1, 0, 0}, et[3] = {0, 1, 0};
  if (std::fabs(det3(av, bv, ex)) > 1e-10) return complement_coefficient(av, bv, ex, br);
  return complement_coefficient(av, bv, et, br);
}

double curvature(const FluxModel& model, const Vec3& f) {
  model.require_m2("curvature");
  const geom::VectorField X = model::characteristic_field(model);
  const geom::VectorField Y = fiber_field(model.domain);
  return reduced_bracket_coefficient(Y, X, f);
}

double verify_kappa_curvature_identity(const FluxModel& model, const Vec3& f) {
  model.require_m2("verify_kappa_curvature_identity");
  const double lhs = characteristics::kappa_fiber_derivative(model, f);

  const geom::VectorField X = model::characteristic_field(model);
  const geom::VectorField Y = fiber_field(model.domain);
  double xv[3], br[3];
  X.eval(f.data(), xv);
  const double z[2] = {f[0], f[1]};
  double dzy[2];
  model.eval_flux_dy(z, f[2], dzy);
  if (std::hypot(dzy[0], dzy[1]) < 1e-12)
    throw NumericsError("verify_kappa_curvature_identity: projected field vanishes at f");
  geom::lie_bracket(Y, X, f.data(), br);
  // Projected bracket w, projected field v; the projectivization derivative
  // sends w to (w_x - kappa * w_t) / v_t in the affine slope chart.
  const double vt = xv[1];
  if (std::fabs(vt) < 1e-12)
    throw NumericsError("verify_kappa_curvature_identity: canonical chart unavailable at f");
  const double kap = xv[0] / vt;
  const double rhs = (br[0] - kap * br[1]) / vt;
  return std::fabs(lhs - rhs) / std::max(1.0, std::fabs(lhs));
}

FrameReport check_frame_condition(const FluxModel& model, const Box& region, int grid_density,
                                  double eps_int) {
  model.require_m2("check_frame_condition");
  const geom::VectorField X = model::characteristic_field(model);
  const geom::VectorField Y = fiber_field(model.domain);
  const int n = std::max(2, grid_density);
  std::vector<double> dets(static_cast<std::size_t>(n) * n * n);
  parallel_for(dets.size(), [&](std::size_t idx) {
    const int k = static_cast<int>(idx % n);
    const int j = static_cast<int>((idx / n) % n);
    const int i = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
    double p[3];
    p[0] = region.lo[0] + region.extent(0) * i / (n - 1);
    p[1] = region.lo[1] + region.extent(1) * j / (n - 1);
    p[2] = region.lo[2] + region.extent(2) * k / (n - 1);
    double xv[3], yv[3], br[3];
    X.eval(p, xv);
    Y.eval(p, yv);
    geom::lie_bracket(X, Y, p, br);
    dets[idx] = std::fabs(det3(xv, yv, br));
  });
  FrameReport rep;
  rep.min_det = dets.empty() ? 0.0 : dets[0];
  for (double d : dets) rep.min_det = std::min(rep.min_det, d);
  rep.completely_nonintegrable = rep.min_det > eps_int;
  return rep;
}

double distinguishability_test(const FluxModel& model, const ScalarField& weight,
                               const JumpData& shock) {
  // The input shock must be admissible for the unweighted density.
  const entropy::JumpVerdict base = entropy::jump_admissibility(model, shock);
  if (!base.entropic || std::fabs(base.rh_residual) > 1e-8)
    throw InputError("distinguishability_test: input shock is not admissible for the unweighted density");
  const double norm = std::hypot(shock.nu[0], shock.nu[1]);
  const Vec2 nu{shock.nu[0] / norm, shock.nu[1] / norm};
  const Vec2 w =
      entropy::fiber_flux_integral(model, shock.z, shock.u_right, shock.u_left, weight, 16);
  return nu[0] * w[0] + nu[1] * w[1];
}

}  // namespace charentropy::integrability

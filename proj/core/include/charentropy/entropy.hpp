#pragma once

/** Verification core: Kruzhkov flux, weak Rankine-Hugoniot and entropy
    residuals, per-jump admissibility, and the surface/volume identity
    for sections with explicit jump curves.

    Quadrature: midpoint rule per lattice cell; cells crossed by a jump
    polyline are split into the two one-sided pieces (exact piecewise-linear
    geometry, centroid evaluation). Fiber integrals use composite Simpson
    split at the kink y = u(z).

    Sign conventions are anchored once: the entropy residual of the
    admissible stationary two-state shock of the flat projective model is
    nonnegative. Everything downstream (claws, oriented) inherits them.
*/

#include <functional>
#include <vector>

#include "charentropy/model.hpp"

namespace charentropy::entropy {

using model::FluxModel;
using model::JumpData;
using model::Layer;
using model::PiecewiseSection;

// ---------------------------------------------------------------------------
// Test functions: smooth compactly supported bumps.

struct TestFunction {
  enum class Kind { kBumpOnBase, kBumpOnTotal };
  Kind kind = Kind::kBumpOnBase;
  Vec3 center{};
  Vec3 radii{};
  double amplitude = 1.0;

  int dim() const { return kind == Kind::kBumpOnBase ? 2 : 3; }
  double value(const double* p) const;
  void grad(const double* p, double* out) const;
  Box support() const;
};

TestFunction make_base_bump(double cx, double ct, double rx, double rt, double amplitude = 1.0);
TestFunction make_total_bump(double cx, double ct, double cy, double rx, double rt, double ry,
                             double amplitude = 1.0);

// ---------------------------------------------------------------------------
// Kruzhkov flux

// sgn(u - y) * (Z(z, u) - Z(z, y))
Vec2 kruzhkov_R(const FluxModel& m, const Vec2& z, double u, double y);

// Weighted fiber flux integral int_a^b w(z,y) dZ/dy (z,y) dy (signed).
Vec2 fiber_flux_integral(const FluxModel& m, const Vec2& z, double a, double b,
                         const ScalarField& weight, int panels = 8);

// S(sigma, theta)(z) = int R(z, u(z), y) theta(z, y) dy sampled on the grid
// nodes inside theta's base support.
struct SampledBaseField {
  std::vector<Vec2> points;
  std::vector<Vec2> values;
};
SampledBaseField S_operator(const FluxModel& m, const PiecewiseSection& s,
                            const TestFunction& theta, const Layer* layer = nullptr,
                            int fiber_nodes = 129);

// ---------------------------------------------------------------------------
// Residuals

// Weak divergence-form residual against a base test function:
//   -int { Z(z,u).grad(phi) - S(z,u) phi } dz
double weak_rh_residual(const FluxModel& m, const PiecewiseSection& s, const TestFunction& phi);

// Entropy residual against a nonnegative total-space test function;
// admissible solutions give values >= -tol.
double entropy_residual(const FluxModel& m, const PiecewiseSection& s, const TestFunction& psi,
                        int fiber_nodes = 129, const Layer* layer = nullptr);
// Same with a product test theta(z,y) * phi(z).
double entropy_residual_product(const FluxModel& m, const PiecewiseSection& s,
                                const TestFunction& theta, const TestFunction& phi,
                                int fiber_nodes = 129, const Layer* layer = nullptr);

// ---------------------------------------------------------------------------
// Jump admissibility

struct JumpVerdict {
  double rh_residual = 0;  // <nu, Z(z,ul) - Z(z,ur)>
  bool entropic = false;
  double worst_k = 0;
  double margin = 0;  // min over k of the jump quantity E(k)
};

// Kruzhkov scan E(k) over k strictly between the traces (257 interior
// samples plus endpoints); entropic iff E(k) >= -tol throughout.
JumpVerdict jump_admissibility(const FluxModel& m, const JumpData& jump, double tol = 1e-9,
                               int k_samples = 257);
// Same with a fiber weight lambda(z, y) > 0 on the density.
JumpVerdict jump_admissibility_weighted(const FluxModel& m, const JumpData& jump,
                                        const ScalarField& lambda, double tol = 1e-9,
                                        int k_samples = 257);

// ---------------------------------------------------------------------------
// Surface/volume identity

struct VolpertReport {
  double lhs = 0;  // volume quadrature of the entropy residual with theta * phi
  double rhs = 0;  // -int_Gamma <Delta S(sigma,theta), nu> phi dH1
  double difference = 0;
};

VolpertReport volpert_identity_check(const FluxModel& m, const PiecewiseSection& s,
                                     const TestFunction& theta, const TestFunction& phi,
                                     int fiber_nodes = 129);

// ---------------------------------------------------------------------------
// Shared cell decomposition (also used by the pullback quadratures).

struct CellPiece {
  Vec2 centroid;
  double area = 0;
  int side = 0;  // -1 left of the jump, +1 right, 0 uncrossed
  const model::JumpCurve* jump = nullptr;
};

// Invokes fn for every piece of every lattice cell intersecting box.
void for_each_cell_piece(const PiecewiseSection& s, const Box& box,
                         const std::function<void(const CellPiece&)>& fn);

// Piece-aware section value.
double piece_value(const PiecewiseSection& s, const CellPiece& piece);

// Composite Simpson on [a, b] split at an interior kink.
double integrate_fiber(const std::function<double(double)>& f, double a, double b, double kink,
                       int nodes);

}  // namespace charentropy::entropy

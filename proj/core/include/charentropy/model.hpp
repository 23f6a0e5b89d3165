#pragma once

/** Flux models, entropy densities, layers, and piecewise solution
    candidates. The flat projective structure model (Burgers-type flux
    Z = (y^2/2, y) on z = (x, t)) is the canonical instance.

    Conventions: for a flux Z = (Z1, Z2) on z = (x, t) and source S the
    equation in divergence form is
        d/dx Z1(z, u) + d/dt Z2(z, u) + S(z, u) = 0,
    and the characteristic field on the total (x, t, y) space is
        X = (dZ1/dy, dZ2/dy, -(dZ1/dx + dZ2/dt) - S).
*/

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "charentropy/geometry.hpp"
#include "charentropy/support/numeric.hpp"
#include "charentropy/support/poly.hpp"

namespace charentropy::model {

// ---------------------------------------------------------------------------
// FluxModel

struct PolyFlux {
  Poly3 z1, z2, source;  // source uses (x, t, y) like the fluxes
};

struct FluxModel {
  int m = 2;  // base dimension; numerical operations require m == 2
  std::function<void(const double* z, double y, double* out)> flux;      // Z1, Z2
  std::function<double(const double* z, double y)> source;               // S
  // Optional analytic jets.
  std::function<void(const double* z, double y, double* out)> flux_dy;   // dZ/dy (2)
  std::function<void(const double* z, double y, double* out)> flux_dz;   // dZ^i/dz_j, row-major (4)
  std::function<void(const double* z, double y, double* out)> flux_dy_dz;  // d2Z^i/dy dz_j (4)
  Box domain;  // (x, t, y) box
  double fd_step = kDefaultFdStep;
  // Conserved leaf coordinates of the characteristic foliation, when known.
  std::vector<ScalarField> leaf_invariants;
  std::shared_ptr<const PolyFlux> poly;  // set for polynomial-backed models

  void eval_flux(const double* z, double y, double* out) const { flux(z, y, out); }
  double eval_source(const double* z, double y) const { return source ? source(z, y) : 0.0; }
  void eval_flux_dy(const double* z, double y, double* out) const;
  void eval_flux_dz(const double* z, double y, double* out) const;  // 2x2 row-major
  double flux_divergence(const double* z, double y) const;          // dZ1/dx + dZ2/dt
  void require_m2(const char* op) const;
  bool in_domain(const double* p, double margin = 0.0) const { return domain.contains(p, margin); }
};

// Characteristic field of the model as a 3-space vector field; the
// jacobian is analytic for polynomial-backed models.
geom::VectorField characteristic_field(const FluxModel& model);

// Canonical flat projective structure model: Z = (y^2/2, y), zero source.
FluxModel make_flat_projective_model();
FluxModel make_flat_projective_model(const Box& domain);

// General polynomial model with exact jets.
FluxModel make_polynomial_model(const Poly3& z1, const Poly3& z2, const Poly3& source,
                                const Box& domain);

// ---------------------------------------------------------------------------
// EntropyDensity: rho = (weight |dy|) (x) (field_scale * X_model)

struct EntropyDensity {
  FluxModel flux_model;
  ScalarField weight;       // lambda > 0
  ScalarField field_scale;  // > 0; canonical form has field_scale * dZ2/dy == 1
  bool canonical = false;

  // field_scale * X_model as a vector field with best-available jets
  geom::VectorField field() const;
  double weight_value(const double* p) const { return weight.value(p); }
};

EntropyDensity unit_density(const FluxModel& model);

// Rescales so the t-component of the field is identically 1.
// Errors with a witness point when dZ2/dy * field_scale vanishes in the region.
EntropyDensity canonicalize(const EntropyDensity& rho, const Box& region, int samples_per_axis = 9);

// ---------------------------------------------------------------------------
// Sections and jumps

struct Layer {
  std::function<double(const double* z)> lower;  // sigma1
  std::function<double(const double* z)> upper;  // sigma2
};

struct JumpCurve {
  std::vector<double> t;  // strictly increasing
  std::vector<double> x;  // polyline x(t)
  std::function<double(double t)> u_left;   // trace on x < x(t)
  std::function<double(double t)> u_right;  // trace on x > x(t)
  // Optional analytic one-sided extensions used for evaluation near the curve.
  std::function<double(const double* z)> ext_left, ext_right;

  bool covers(double time) const { return time >= t.front() && time <= t.back(); }
  double x_at(double time) const;
  double slope_at(double time) const;
  double side_value(double time, int side) const {
    return side < 0 ? u_left(time) : u_right(time);
  }
};

struct PiecewiseSection {
  std::vector<double> xs, ts;  // lattice axes
  std::vector<double> u;       // u[j * xs.size() + i] at (xs[i], ts[j])
  std::vector<JumpCurve> jumps;

  double dx() const { return xs.size() > 1 ? xs[1] - xs[0] : 0.0; }
  double dt() const { return ts.size() > 1 ? ts[1] - ts[0] : 0.0; }
  double& at(std::size_t i, std::size_t j) { return u[j * xs.size() + i]; }
  double at(std::size_t i, std::size_t j) const { return u[j * xs.size() + i]; }

  // Side-aware evaluation: cells crossed by a declared jump use the traces
  // (or analytic extensions); everything else is bilinear interpolation.
  double eval(double x, double t) const;
  double eval_side(double x, double t, const JumpCurve& jump, int side) const;
  // Jump crossing the given cell, or nullptr.
  const JumpCurve* cell_jump(std::size_t i, std::size_t j) const;
  void rebuild_jump_index();

  double min_value() const;
  double max_value() const;

 private:
  std::vector<int> cell_jump_index_;  // -1 or jump id per cell
};

struct JumpData {
  Vec2 z;        // base point on the jump curve
  Vec2 nu;       // unit conormal pointing from the left-trace side to the right
  double u_left = 0, u_right = 0;
};

// Uniform lattice helper.
PiecewiseSection make_section_grid(double x0, double x1, int nx, double t0, double t1, int nt);
// Constant and two-state factories (exact traces, analytic side extensions).
PiecewiseSection make_constant_section(double value, double x0, double x1, int nx, double t0,
                                       double t1, int nt);
PiecewiseSection make_two_state_section(std::function<double(const double*)> left,
                                        std::function<double(const double*)> right,
                                        std::vector<double> curve_t, std::vector<double> curve_x,
                                        double x0, double x1, int nx, double t0, double t1, int nt);

Layer default_layer(const PiecewiseSection& s, double pad = 0.5);

struct SectionReportEntry {
  double x, t, value;
  std::string what;
};
struct SectionReport {
  std::vector<SectionReportEntry> violations;
  bool ok() const { return violations.empty(); }
};

SectionReport validate_section(const PiecewiseSection& s, const Layer& layer);

}  // namespace charentropy::model

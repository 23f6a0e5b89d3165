#pragma once

/** Conservation laws from characteristics: the flux form alpha and its
    dictionary with vector fields, neighbourhoods of foliation cut with a
    flow projection, the transport solver for i_X d(alpha) = beta,
    i_X alpha = gamma, j* alpha = delta, and the two-step construction of
    a conservation law from boundary data on a common cut. */

#include <functional>
#include <optional>

#include "charentropy/entropy.hpp"
#include "charentropy/geometry.hpp"
#include "charentropy/model.hpp"

namespace charentropy::claws {

using model::FluxModel;
using model::PiecewiseSection;

// ---------------------------------------------------------------------------
// Flux form dictionary

struct AlphaReport {
  double max_ix_dalpha = 0;
  double min_iy_dalpha = 0;
};

// alpha = Z1 dt - Z2 dx (no dy component); validates i_X d(alpha) ~ 0 and
// i_Y d(alpha) != 0 on a sample grid. Degenerate fiber dependence raises
// NumericsError.
geom::FormField alpha_from_flux(const FluxModel& model, AlphaReport* report = nullptr,
                                bool validate = true);

// Unique X~ with i_X~(volume) = d(alpha); errors where d(alpha) = 0.
geom::VectorField field_from_alpha(const geom::FormField& alpha, const geom::FormField& volume);

// Weak residual of d(sigma* alpha) = 0 against a base test function:
//   int (alpha_x(z, u) dphi/dt - alpha_t(z, u) dphi/dx) dz,
// jump-aware like the entropy quadratures.
double classical_check_via_alpha(const geom::FormField& alpha, const PiecewiseSection& s,
                                 const entropy::TestFunction& phi);

// ---------------------------------------------------------------------------
// Foliation cuts

struct SurfacePatch {
  std::function<Vec3(double, double)> param;  // (a, b) -> (x, t, y)
  Box param_domain;                           // dim 2
  std::function<double(const Vec3&)> level;   // zero on S, smooth near it
  std::function<bool(const Vec3&)> valid;     // region where level is usable
};

// Graph surface y = f(x, t) over a base window.
SurfacePatch make_graph_surface(std::function<double(double, double)> f, const Box& base_window,
                                std::function<bool(const Vec3&)> valid = nullptr);

// The common cut of the flat projective model: S = graph(-t/x).
SurfacePatch flat_projective_cut_surface(const Box& base_window, double min_x = 0.02);

struct ProjectResult {
  Vec3 point{};       // on S
  double flow_time = 0;  // flow by this time from the query point reaches S
};

struct FoliationCut {
  Box window;
  geom::VectorField flow;
  SurfacePatch surface;
  double probe_step = 0;  // marching step along leaves
  double max_span = 0;    // marching span bound
  int flow_substeps = 2;  // RK4 substeps per probe step

  ProjectResult project(const Vec3& u) const;
  int count_crossings(const Vec3& u) const;
  Vec3 flow_state(const Vec3& u, double time) const;
};

struct CutOptions {
  int surface_samples = 20;  // per param axis
  int line_probes = 50;
  int window_shrinks = 6;
  double kernel_tol = 1e-5;
};

// Verifies (i) p restricted to S is the identity, (ii) the flow direction
// spans ker Tp, (iii) sampled leaves meet S exactly once; shrinks the
// window and retries when leaves fail to reach S.
FoliationCut build_cut(const geom::VectorField& flow, const SurfacePatch& surface,
                       const Box& window, const CutOptions& options = {});

// ---------------------------------------------------------------------------
// Transport

struct GridDims {
  int nx = 25, nt = 25, ny = 49;
};

// Form produced by flow transport: lattice of coefficients (trilinear
// evaluation) plus the exact per-point shooting evaluator used for
// derivative-level validation.
struct TransportedForm {
  Box box;
  GridDims dims;
  std::vector<double> coeffs;  // 3 per node, x-fastest then t then y
  std::function<void(const double*, double*)> exact;

  void eval_grid(const double* p, double* out) const;
  geom::FormField grid_form() const;   // trilinear values
  geom::FormField exact_form(double jet_step = 1e-4) const;
};

struct TransportOptions {
  int line_nodes = 101;
  bool fill_grid = true;
};

// Solves i_X d(alpha) = beta, i_X alpha = gamma, j* alpha = delta along the
// cut's flow (Lie transport with the tangent-flow variational system).
// beta may be empty (zero source); gamma is a scalar field (0-form).
TransportedForm transport_solve(const FoliationCut& cut, const geom::FormField* beta,
                                const ScalarField& gamma, const geom::FormField& delta,
                                const Box& grid_box, const GridDims& dims,
                                const TransportOptions& options = {});

// ---------------------------------------------------------------------------
// Conservation-law construction

struct ClawResult {
  TransportedForm beta;             // flow-invariant extension of gamma
  TransportedForm alpha;            // beta + d(phi)
  bool nondegenerate = false;       // sampled d(alpha) != 0
  double max_ix2_alpha = 0;         // validation residuals at sample points
  double max_ix1_dalpha = 0;
  double min_dalpha_norm = 0;
};

struct ClawOptions {
  GridDims dims{25, 25, 49};
  int line_nodes = 101;
  int validation_samples = 100;
  double tol = 1e-3;
  double jet_step = 1e-4;
  unsigned seed = 20240811;
};

// Two-step construction: beta from cut1 (characteristic foliation) with
// zero sources and boundary data gamma, then the scalar correction phi
// along cut2 (fiber foliation) with L_X2 phi = -i_X2 beta and phi = 0
// on the shared surface. Requires both cuts to share the surface.
ClawResult build_conservation_law(const FoliationCut& cut1, const FoliationCut& cut2,
                                  const geom::FormField& gamma, const Box& grid_box,
                                  const ClawOptions& options = {});

}  // namespace charentropy::claws

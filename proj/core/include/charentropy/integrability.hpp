#pragma once

/** Curvature of the characteristic-plus-fiber plane field, its link to the
    fiber derivative of kappa, the complete non-integrability frame test,
    and the contrapositive reweighting test for distinguishing entropy
    densities by their admissible shocks. */

#include "charentropy/entropy.hpp"
#include "charentropy/model.hpp"

namespace charentropy::integrability {

using model::FluxModel;
using model::JumpData;

// Scalar curvature of span{X, Y} at f: the bracket [Y, X] reduced modulo
// span{X_f, Y_f}, reported as its coefficient on a fixed complement
// direction (d/dx, falling back to d/dt when dependent). Only the
// vanishing of the value is frame-independent.
double curvature(const FluxModel& model, const Vec3& f);

// Reduction helper with explicit field order (antisymmetric in A, B).
double reduced_bracket_coefficient(const geom::VectorField& A, const geom::VectorField& B,
                                   const Vec3& f);

// Relative error between the fiber derivative of kappa and its
// bracket/projection expression through the curvature.
double verify_kappa_curvature_identity(const FluxModel& model, const Vec3& f);

struct FrameReport {
  double min_det = 0;  // min over the grid of |det(X, Y, [X,Y])|
  bool completely_nonintegrable = false;
};

FrameReport check_frame_condition(const FluxModel& model, const Box& region, int grid_density,
                                  double eps_int = 1e-8);

// Rankine-Hugoniot residual of an admissible shock with respect to the
// density reweighted by m(z, y) > 0; vanishes for fiber-constant weights.
double distinguishability_test(const FluxModel& model, const ScalarField& weight,
                               const JumpData& shock);

}  // namespace charentropy::integrability

#pragma once

/** Exterior-calculus and orientation-arithmetic kit on coordinate boxes in
    2- and 3-dimensional space, shared by every other module.

    Conventions fixed once for the whole library:
      - coordinate order (x, t, y) on the total space, (x, t) on the base;
      - wedge coefficient arrays are stored in lexicographic index order;
      - the reference volume form used to tie forms to vector fields is
        kVolumeSign * dx^dt^dy with kVolumeSign = (-1)^(m-1) = -1 for a
        2-dimensional base, so that contracting the characteristic field
        into the weighted volume reproduces the exterior derivative of the
        flux form exactly (see claws/alpha_from_flux).
*/

#include <functional>

#include "charentropy/support/numeric.hpp"

namespace charentropy::geom {

inline constexpr double kVolumeSign = -1.0;  // (-1)^(m-1) with m = 2

// ---------------------------------------------------------------------------
// Types

struct VectorField {
  int dim = 3;
  std::function<void(const double*, double*)> components;
  // Optional analytic first derivatives, row-major: jac[i*dim + j] = d comp_i / d x_j.
  std::function<void(const double*, double*)> jacobian;
  Box domain;
  double fd_step = kDefaultFdStep;

  void eval(const double* p, double* out) const { components(p, out); }
  void eval_jacobian(const double* p, double* jac) const;
};

struct FormField {
  int dim = 3;
  int degree = 1;
  // coefficient count = binomial(dim, degree), lexicographic basis order
  std::function<void(const double*, double*)> coeffs;
  // Optional analytic derivatives: jac[k*dim + j] = d coeff_k / d x_j.
  std::function<void(const double*, double*)> coeff_jacobian;
  Box domain;
  double fd_step = kDefaultFdStep;

  int rank() const;
  void eval(const double* p, double* out) const { coeffs(p, out); }
  void eval_jacobian(const double* p, double* jac) const;
};

enum class OrientationRole { kFiber, kBase, kTotal };

struct OrientationSign {
  int value = +1;  // in {+1, -1}
  OrientationRole role = OrientationRole::kTotal;
};

struct DensitySpec {
  int dim = 3;
  ScalarField weight;  // strictly positive on its domain
  Box domain;
};

// A density-valued form: even form plus an orientation tag.
struct OddForm {
  FormField form;
  OrientationSign orientation;
};

enum class SignProduct { kRTimes, kLTimes, kDivideRight, kDivideLeft };

// ---------------------------------------------------------------------------
// Wedge basis bookkeeping (dim <= 3)

int binomial(int n, int k);
// k-th lexicographic strictly-increasing index tuple of length `degree`
const int* basis_tuple(int dim, int degree, int k);
// position of a sorted tuple in the lexicographic basis
int basis_position(int dim, int degree, const int* sorted);
// sign of the permutation sorting `ix` (0 if a repeated index)
int sort_sign(int* ix, int n);

// ---------------------------------------------------------------------------
// Operations

// [X, Y] at a point; analytic jacobians are used when both fields carry
// them, otherwise central differences at fd_step.
void lie_bracket(const VectorField& X, const VectorField& Y, const double* p, double* out);

// Exterior derivative coefficients of w at p (degree + 1 array).
void exterior_derivative(const FormField& w, const double* p, double* out);
// Closure form: d(w) as a FormField. Its coefficient derivatives are wired
// to second-difference stencils of the base coefficients so that d(d(w))
// stays near the roundoff floor instead of the noise of nested first
// differences.
FormField exterior_derivative(const FormField& w);

// Contraction in the first slot: (i_X w)(v...) = w(X, v...).
void interior_product(const VectorField& X, const FormField& w, const double* p, double* out);

// Orientation algebra on (p, d) splittings: o x theta products and the two
// inverse divisions, with ltimes = (-1)^(p(d-p)) rtimes.
OrientationSign orientation_compose(OrientationSign first, OrientationSign second, int p, int d,
                                    SignProduct mode);

// Weighted reference volume kVolumeSign * w(p) dx^dt^dy on the 3-space.
FormField oriented_volume_form(ScalarField weight, Box domain);

// Contracted product rho |x pibar*mu = i_X(lambda x| pibar*mu): the fiber
// weight times base density assembled into the weighted volume, contracted
// with X. Carries an orientation tag (odd 2-form).
OddForm contracted_product(const DensitySpec& fiber_weight, const VectorField& X,
                           const DensitySpec& base_density,
                           OrientationSign orientation = {+1, OrientationRole::kTotal});

// Unique X with i_X(volume) = w for a 2-form w on the 3-space.
void field_from_two_form(const FormField& volume, const double* p, const double* two_form_coeffs,
                         double* field_out);

// Divergence of X with respect to the weighted volume nu: the coefficient
// of d(i_X nu) relative to nu.
double divergence(const VectorField& X, const FormField& volume, const double* p);

}  // namespace charentropy::geom

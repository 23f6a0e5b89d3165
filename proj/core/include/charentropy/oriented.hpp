#pragma once

/** Oriented conservation laws: the base-covector immersion iota, the
    density induced by d(tau), the pullback form of the weak residual and
    its equality with the divergence-form residual, the fiber integral
    identity, separability of positive factors, and the closed-1-form
    characterization of densities that come from oriented laws. */

#include <optional>
#include <string>

#include "charentropy/entropy.hpp"
#include "charentropy/geometry.hpp"
#include "charentropy/model.hpp"

namespace charentropy::oriented {

using model::EntropyDensity;
using model::FluxModel;
using model::PiecewiseSection;

// ---------------------------------------------------------------------------
// Oriented law

struct OrientedLaw {
  geom::FormField alpha;  // degree 1, zero dy coefficient
  geom::OrientationSign omega{+1, geom::OrientationRole::kTotal};
  Box domain;  // H

  // (alpha, omega) and (-alpha, -omega) are the same law.
  OrientedLaw flipped() const;
};

// Law of a flux model (alpha = Z1 dt - Z2 dx).
OrientedLaw law_from_model(const FluxModel& model, int omega = +1);
// Law from a general 1-form; rejects nonzero dy coefficients.
OrientedLaw law_from_form(const geom::FormField& alpha, int omega, const Box& domain,
                          double tol = 1e-10);

// iota(f): the alpha coefficients read as a base covector (dx, dt) at f.
Vec2 iota(const OrientedLaw& law, const Vec3& f);
// min |d(iota)/dy| over the fiber interval.
double immersion_check(const OrientedLaw& law, const Vec2& z, double y_lo, double y_hi,
                       int samples = 65);

// Density with rho |x pibar*mu = d(tau): reconstructs the flux model from
// the law, solves i_X(volume) = d(alpha) with the mu-weighted volume, and
// returns the canonical entropy density. Errors where d(alpha) = 0 or the
// resolved weight is not positive.
EntropyDensity rho_from_tau(const OrientedLaw& law, const ScalarField& mu_weight);

// ---------------------------------------------------------------------------
// Identity-level checks

struct PullbackReport {
  double pullback_residual = 0;
  double weak_residual = 0;
  double difference = 0;
};

// Pullback residual int (sigma* alpha) ^ d(phi) with the law's orientation
// flag versus the divergence-form weak residual through rho_from_tau.
PullbackReport rh_via_pullback(const OrientedLaw& law, const PiecewiseSection& s,
                               const entropy::TestFunction& phi,
                               const ScalarField* mu_weight = nullptr);

struct IntegralIdentityReport {
  Vec2 lhs{};  // i_{fiber integral of the projected density} mu
  Vec2 rhs{};  // sgn(b - a) (iota(b) - iota(a)) with the orientation flag
  double difference = 0;
};

IntegralIdentityReport integral_identity_check(const OrientedLaw& law, const ScalarField& mu_weight,
                                               const Vec2& z, double a, double b,
                                               int fiber_orientation = +1);

// ---------------------------------------------------------------------------
// Separability and existence

struct SeparabilityReport {
  bool separable = false;
  double closedness_residual = 0;
};

// f = g * h with L_X g = 0 and L_Y h = 0 iff the frame-built 1-form is
// closed; requires the complete non-integrability frame on the domain.
// eps_closed <= 0 selects the threshold automatically: 1e-6 when f carries
// an analytic gradient, 1e-3 for finite-difference jets (their noise floor).
SeparabilityReport separability_test(const ScalarField& f, const geom::VectorField& X,
                                     const geom::VectorField& Y, const Box& domain,
                                     int grid_density = 7, double eps_closed = 0.0);

struct ExistenceReport {
  bool closed = false;
  double residual = 0;           // max |d(xi)| over the grid
  bool has_candidate = false;
  double reverify_residual = 0;  // max |d(f rho |x pibar*mu)| for the candidate
  std::string diagnostic;
  ScalarField candidate_f;       // defined when has_candidate
};

struct ExistenceOptions {
  int grid_density = 7;
  double eps_closed = 0.0;  // <= 0: 1e-6 with analytic jets, 1e-3 otherwise
  double reverify_tol = 1e-5;
  double fiber_consistency_tol = 1e-6;
};

// Closedness of the divergence 1-form xi built on the frame (X, Y, [Y,X]);
// when closed, constructs a base-function candidate f by axis-path
// integration and re-verifies d(f rho |x pibar*mu) directly.
ExistenceReport oriented_existence_test(const EntropyDensity& rho, const ScalarField& mu_weight,
                                        const Box& domain, const ExistenceOptions& options = {});

// Divergence of X with respect to the weighted volume (as a density).
double div_nu(const geom::VectorField& X, const ScalarField& nu_weight, const Vec3& point);

}  // namespace charentropy::oriented

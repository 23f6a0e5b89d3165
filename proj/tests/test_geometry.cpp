#include "charentropy/geometry.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "charentropy/support/poly.hpp"

using namespace charentropy;

namespace {

geom::VectorField const_axis_field(int axis, const Box& domain) {
  geom::VectorField f;
  f.dim = 3;
  f.domain = domain;
  f.components = [axis](const double*, double* out) {
    out[0] = out[1] = out[2] = 0;
    out[axis] = 1;
  };
  f.jacobian = [](const double*, double* jac) {
    for (int k = 0; k < 9; ++k) jac[k] = 0;
  };
  return f;
}

geom::VectorField poly_vector_field(const Poly3& cx, const Poly3& ct, const Poly3& cy,
                                    const Box& domain, bool analytic_jets) {
  geom::VectorField f;
  f.dim = 3;
  f.domain = domain;
  f.components = [cx, ct, cy](const double* p, double* out) {
    out[0] = cx.eval(p);
    out[1] = ct.eval(p);
    out[2] = cy.eval(p);
  };
  if (analytic_jets) {
    std::array<Poly3, 9> d;
    const Poly3 rows[3] = {cx, ct, cy};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) d[i * 3 + j] = rows[i].derivative(j);
    f.jacobian = [d](const double* p, double* jac) {
      for (int k = 0; k < 9; ++k) jac[k] = d[k].eval(p);
    };
  }
  return f;
}

geom::FormField poly_one_form(const Poly3& ax, const Poly3& at, const Poly3& ay, const Box& domain,
                              bool analytic_jets) {
  geom::FormField w;
  w.dim = 3;
  w.degree = 1;
  w.domain = domain;
  w.coeffs = [ax, at, ay](const double* p, double* out) {
    out[0] = ax.eval(p);
    out[1] = at.eval(p);
    out[2] = ay.eval(p);
  };
  if (analytic_jets) {
    std::array<Poly3, 9> d;
    const Poly3 rows[3] = {ax, at, ay};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) d[i * 3 + j] = rows[i].derivative(j);
    w.coeff_jacobian = [d](const double* p, double* jac) {
      for (int k = 0; k < 9; ++k) jac[k] = d[k].eval(p);
    };
  }
  return w;
}

Poly3 random_quadratic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Poly3 p;
  for (int px = 0; px <= 2; ++px)
    for (int pt = 0; pt + px <= 2; ++pt)
      for (int py = 0; py + pt + px <= 2; ++py) p.terms.push_back({coef(rng), px, pt, py});
  return p;
}

const Box kBox = make_box3(-1, 1, -1, 1, -1, 1);

}  // namespace

TEST_CASE("lie bracket of the canonical frame") {
  // X = d/dt + y d/dx, Y = d/dy: [Y, X] = d/dx at every point
  geom::VectorField X = poly_vector_field(Poly3{{{1, 0, 0, 1}}}, Poly3::constant(1), Poly3{},
                                          kBox, true);
  geom::VectorField Y = const_axis_field(kAxisY, kBox);
  const double pts[3][3] = {{0, 0, 0}, {0.3, -0.2, 0.7}, {-0.5, 0.5, -0.1}};
  for (const auto& p : pts) {
    double br[3];
    geom::lie_bracket(Y, X, p, br);
    CHECK(br[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(br[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(br[2] == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("bracket with itself vanishes") {
    double br[3];
    geom::lie_bracket(X, X, pts[1], br);
    CHECK(std::fabs(br[0]) + std::fabs(br[1]) + std::fabs(br[2]) < 1e-12);
  }

  SUBCASE("coordinate fields commute") {
    geom::VectorField ex = const_axis_field(kAxisX, kBox);
    geom::VectorField et = const_axis_field(kAxisT, kBox);
    double br[3];
    geom::lie_bracket(ex, et, pts[0], br);
    CHECK(std::fabs(br[0]) + std::fabs(br[1]) + std::fabs(br[2]) < 1e-12);
  }

  SUBCASE("antisymmetry is exact") {
    auto rng = oracles::rng(11);
    geom::VectorField A = poly_vector_field(random_quadratic(rng), random_quadratic(rng),
                                            random_quadratic(rng), kBox, true);
    geom::VectorField B = poly_vector_field(random_quadratic(rng), random_quadratic(rng),
                                            random_quadratic(rng), kBox, true);
    const double p[3] = {0.2, -0.3, 0.4};
    double ab[3], ba[3];
    geom::lie_bracket(A, B, p, ab);
    geom::lie_bracket(B, A, p, ba);
    for (int c = 0; c < 3; ++c) CHECK(ab[c] == doctest::Approx(-ba[c]).epsilon(1e-14));
  }

  SUBCASE("point outside the margin is a domain error") {
    const double p[3] = {1.0, 0.0, 0.0};  // exactly on the boundary
    double br[3];
    CHECK_THROWS_AS(geom::lie_bracket(Y, X, p, br), NumericsError);
  }
}

TEST_CASE("exterior derivative of the flux form") {
  // alpha = (y^2/2) dt - y dx: d(alpha) = dx^dy - y dt^dy
  geom::FormField a = poly_one_form(Poly3{{{-1, 0, 0, 1}}}, Poly3{{{0.5, 0, 0, 2}}}, Poly3{},
                                    kBox, true);
  const double p[3] = {0.4, -0.2, 0.6};
  double da[3];
  geom::exterior_derivative(a, p, da);
  CHECK(da[0] == doctest::Approx(0.0).epsilon(1e-12));   // dx^dt
  CHECK(da[1] == doctest::Approx(1.0).epsilon(1e-12));   // dx^dy
  CHECK(da[2] == doctest::Approx(-p[2]).epsilon(1e-12)); // dt^dy

  SUBCASE("finite differences agree with the analytic jets") {
    geom::FormField a_fd = poly_one_form(Poly3{{{-1, 0, 0, 1}}}, Poly3{{{0.5, 0, 0, 2}}}, Poly3{},
                                         kBox, false);
    double da_fd[3];
    geom::exterior_derivative(a_fd, p, da_fd);
    for (int c = 0; c < 3; ++c) CHECK(da_fd[c] == doctest::Approx(da[c]).epsilon(1e-9));
  }

  SUBCASE("constant coefficients give zero") {
    geom::FormField c = poly_one_form(Poly3::constant(2), Poly3::constant(-3), Poly3::constant(1),
                                      kBox, true);
    double dc[3];
    geom::exterior_derivative(c, p, dc);
    CHECK(std::fabs(dc[0]) + std::fabs(dc[1]) + std::fabs(dc[2]) < 1e-12);
  }

  SUBCASE("degree == dim is rejected") {
    geom::FormField vol = geom::oriented_volume_form(constant_field(1.0), kBox);
    double out[1];
    CHECK_THROWS_AS(geom::exterior_derivative(vol, p, out), InputError);
  }
}

TEST_CASE("d(d(omega)) stays at the roundoff floor") {
  auto rng = oracles::rng(23);
  SUBCASE("analytic jets") {
    for (int rep = 0; rep < 4; ++rep) {
      geom::FormField w = poly_one_form(random_quadratic(rng), random_quadratic(rng),
                                        random_quadratic(rng), kBox, true);
      geom::FormField dw = geom::exterior_derivative(w);
      std::uniform_real_distribution<double> u(-0.8, 0.8);
      for (int k = 0; k < 25; ++k) {
        const double p[3] = {u(rng), u(rng), u(rng)};
        double dd[1];
        geom::exterior_derivative(dw, p, dd);
        CHECK(std::fabs(dd[0]) <= 1e-8);
      }
    }
  }
  SUBCASE("finite-difference jets") {
    for (int rep = 0; rep < 4; ++rep) {
      geom::FormField w = poly_one_form(random_quadratic(rng), random_quadratic(rng),
                                        random_quadratic(rng), kBox, false);
      geom::FormField dw = geom::exterior_derivative(w);
      std::uniform_real_distribution<double> u(-0.8, 0.8);
      for (int k = 0; k < 25; ++k) {
        const double p[3] = {u(rng), u(rng), u(rng)};
        double dd[1];
        geom::exterior_derivative(dw, p, dd);
        CHECK(std::fabs(dd[0]) <= 100 * kDefaultFdStep * kDefaultFdStep);
      }
    }
  }
}

TEST_CASE("interior product conventions") {
  geom::FormField vol = geom::oriented_volume_form(constant_field(1.0), kBox);
  // strip the volume sign to probe the raw basis contraction
  geom::FormField raw = vol;
  raw.coeffs = [](const double*, double* out) { out[0] = 1.0; };
  const double p[3] = {0.1, 0.2, 0.3};

  SUBCASE("i_Y (dx^dt^dy) = +dx^dt") {
    geom::VectorField Y = const_axis_field(kAxisY, kBox);
    double out[3];
    geom::interior_product(Y, raw, p, out);
    CHECK(out[0] == doctest::Approx(1.0));   // dx^dt
    CHECK(out[1] == doctest::Approx(0.0));
    CHECK(out[2] == doctest::Approx(0.0));
  }

  SUBCASE("i_X(dx) = X^x") {
    geom::FormField dx = poly_one_form(Poly3::constant(1), Poly3{}, Poly3{}, kBox, true);
    geom::VectorField ex = const_axis_field(kAxisX, kBox);
    double out[1];
    geom::interior_product(ex, dx, p, out);
    CHECK(out[0] == doctest::Approx(1.0));
  }

  SUBCASE("double contraction vanishes") {
    auto rng = oracles::rng(7);
    geom::VectorField X = poly_vector_field(random_quadratic(rng), random_quadratic(rng),
                                            random_quadratic(rng), kBox, true);
    double two[3];
    geom::interior_product(X, raw, p, two);
    geom::FormField as_two = raw;
    as_two.degree = 2;
    as_two.coeffs = [two](const double*, double* out) {
      out[0] = two[0];
      out[1] = two[1];
      out[2] = two[2];
    };
    double one[3];
    geom::interior_product(X, as_two, p, one);
    CHECK(std::fabs(one[0]) + std::fabs(one[1]) + std::fabs(one[2]) < 1e-12);
  }

  SUBCASE("degree zero is rejected") {
    geom::FormField f0 = raw;
    f0.degree = 0;
    geom::VectorField ex = const_axis_field(kAxisX, kBox);
    double out[1];
    CHECK_THROWS_AS(geom::interior_product(ex, f0, p, out), InputError);
  }
}

TEST_CASE("orientation sign algebra") {
  using geom::OrientationSign;
  using geom::SignProduct;
  const OrientationSign plus{+1, geom::OrientationRole::kFiber};
  const OrientationSign minus{-1, geom::OrientationRole::kBase};

  SUBCASE("p=1, d=3 makes both products agree") {
    const auto r = geom::orientation_compose(plus, minus, 1, 3, SignProduct::kRTimes);
    const auto l = geom::orientation_compose(minus, plus, 1, 3, SignProduct::kLTimes);
    CHECK(r.value == l.value);
  }
  SUBCASE("p=1, d=2 flips") {
    const auto r = geom::orientation_compose(plus, minus, 1, 2, SignProduct::kRTimes);
    const auto l = geom::orientation_compose(minus, plus, 1, 2, SignProduct::kLTimes);
    CHECK(r.value == -l.value);
  }
  SUBCASE("the two products differ by (-1)^(p(d-p)) for all p <= d <= 3") {
    for (int d = 0; d <= 3; ++d)
      for (int p = 0; p <= d; ++p)
        for (int o = -1; o <= 1; o += 2)
          for (int th = -1; th <= 1; th += 2) {
            const OrientationSign os{o, geom::OrientationRole::kFiber};
            const OrientationSign ts{th, geom::OrientationRole::kBase};
            const int flip = ((p * (d - p)) % 2 == 0) ? 1 : -1;
            const auto r = geom::orientation_compose(os, ts, p, d, SignProduct::kRTimes);
            const auto l = geom::orientation_compose(ts, os, p, d, SignProduct::kLTimes);
            CHECK(l.value == flip * r.value);
          }
  }
  SUBCASE("division identities hold for all p <= d <= 3") {
    for (int d = 0; d <= 3; ++d)
      for (int p = 0; p <= d; ++p)
        for (int o = -1; o <= 1; o += 2)
          for (int w = -1; w <= 1; w += 2) {
            const OrientationSign os{o, geom::OrientationRole::kFiber};
            const OrientationSign ws{w, geom::OrientationRole::kTotal};
            // o x (w / o) = w
            const auto quot = geom::orientation_compose(ws, os, p, d, SignProduct::kDivideRight);
            const auto back = geom::orientation_compose(os, quot, p, d, SignProduct::kRTimes);
            CHECK(back.value == w);
            // (o \ w) |x o = w
            const auto lquot = geom::orientation_compose(os, ws, p, d, SignProduct::kDivideLeft);
            const auto lback = geom::orientation_compose(lquot, os, p, d, SignProduct::kLTimes);
            CHECK(lback.value == w);
            // o \ w = (-1)^(p(d-p)) w / o
            const int flip = ((p * (d - p)) % 2 == 0) ? 1 : -1;
            CHECK(lquot.value == flip * quot.value);
          }
  }
}

TEST_CASE("contracted product against the weighted volume") {
  geom::DensitySpec lambda{3, constant_field(1.0), kBox};
  geom::DensitySpec mu{2, constant_field(1.0), kBox};
  geom::VectorField X = poly_vector_field(Poly3{{{1, 0, 0, 1}}}, Poly3::constant(1), Poly3{},
                                          kBox, true);
  const auto odd = geom::contracted_product(lambda, X, mu);
  const double p[3] = {0.3, -0.4, 0.7};
  double c[3];
  odd.form.eval(p, c);
  // i_X(-dx^dt^dy) with X = d/dt + y d/dx: coefficients (0, +1, -y)
  CHECK(c[0] == doctest::Approx(0.0));
  CHECK(c[1] == doctest::Approx(1.0));
  CHECK(c[2] == doctest::Approx(-p[2]));

  SUBCASE("zero field gives the zero form") {
    geom::VectorField zero = poly_vector_field(Poly3{}, Poly3{}, Poly3{}, kBox, true);
    const auto z = geom::contracted_product(lambda, zero, mu);
    double zc[3];
    z.form.eval(p, zc);
    CHECK(std::fabs(zc[0]) + std::fabs(zc[1]) + std::fabs(zc[2]) == 0.0);
  }

  SUBCASE("scaling the base weight scales the result") {
    geom::DensitySpec mu3{2, constant_field(3.0), kBox};
    const auto scaled = geom::contracted_product(lambda, X, mu3);
    double sc[3];
    scaled.form.eval(p, sc);
    for (int k = 0; k < 3; ++k) CHECK(sc[k] == doctest::Approx(3.0 * c[k]));
  }

  SUBCASE("nonpositive weight is rejected") {
    geom::DensitySpec bad{3, constant_field(-1.0), kBox};
    const auto b = geom::contracted_product(bad, X, mu);
    double bc[3];
    CHECK_THROWS_AS(b.form.eval(p, bc), InputError);
  }
}

TEST_CASE("jacobi identity for analytic fields") {
  auto rng = oracles::rng(31);
  for (int rep = 0; rep < 3; ++rep) {
    geom::VectorField A = poly_vector_field(random_quadratic(rng), random_quadratic(rng),
                                            random_quadratic(rng), kBox, true);
    geom::VectorField B = poly_vector_field(random_quadratic(rng), random_quadratic(rng),
                                            random_quadratic(rng), kBox, true);
    geom::VectorField C = poly_vector_field(random_quadratic(rng), random_quadratic(rng),
                                            random_quadratic(rng), kBox, true);
    auto bracket_field = [&](const geom::VectorField& U, const geom::VectorField& V) {
      geom::VectorField W;
      W.dim = 3;
      W.domain = kBox;
      W.components = [U, V](const double* p, double* out) { geom::lie_bracket(U, V, p, out); };
      return W;
    };
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    const double p[3] = {u(rng), u(rng), u(rng)};
    double t1[3], t2[3], t3[3];
    geom::lie_bracket(A, bracket_field(B, C), p, t1);
    geom::lie_bracket(B, bracket_field(C, A), p, t2);
    geom::lie_bracket(C, bracket_field(A, B), p, t3);
    for (int c = 0; c < 3; ++c) CHECK(std::fabs(t1[c] + t2[c] + t3[c]) <= 1e-6);
  }
}

TEST_CASE("finite-difference jets match analytic jets on polynomials") {
  auto rng = oracles::rng(41);
  const Poly3 cx = random_quadratic(rng), ct = random_quadratic(rng), cy = random_quadratic(rng);
  geom::VectorField fa = poly_vector_field(cx, ct, cy, kBox, true);
  geom::VectorField fn = poly_vector_field(cx, ct, cy, kBox, false);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (int k = 0; k < 20; ++k) {
    const double p[3] = {u(rng), u(rng), u(rng)};
    double ja[9], jn[9];
    fa.eval_jacobian(p, ja);
    fn.eval_jacobian(p, jn);
    for (int c = 0; c < 9; ++c) CHECK(jn[c] == doctest::Approx(ja[c]).epsilon(1e-9));
  }
}

TEST_CASE("field recovery from a two-form against the volume") {
  geom::FormField vol = geom::oriented_volume_form(constant_field(1.0), kBox);
  const double p[3] = {0.2, 0.1, 0.5};
  // d(alpha) of the canonical flux form: (0, 1, -y)
  const double two[3] = {0.0, 1.0, -p[2]};
  double field[3];
  geom::field_from_two_form(vol, p, two, field);
  CHECK(field[0] == doctest::Approx(p[2]));
  CHECK(field[1] == doctest::Approx(1.0));
  CHECK(field[2] == doctest::Approx(0.0));
}

TEST_CASE("divergence with respect to a weighted volume") {
  SUBCASE("unit weight, canonical field: zero") {
    geom::VectorField X = poly_vector_field(Poly3{{{1, 0, 0, 1}}}, Poly3::constant(1), Poly3{},
                                            kBox, true);
    geom::FormField vol = geom::oriented_volume_form(constant_field(1.0), kBox);
    const double p[3] = {0.3, 0.2, -0.4};
    CHECK(std::fabs(geom::divergence(X, vol, p)) < 1e-12);
  }
  SUBCASE("exponential weight against d/dx gives one") {
    geom::VectorField ex = const_axis_field(kAxisX, kBox);
    ScalarField w;
    w.value = [](const double* p) { return std::exp(p[0]); };
    w.gradient = [](const double* p, double* g) {
      g[0] = std::exp(p[0]);
      g[1] = 0;
      g[2] = 0;
    };
    geom::FormField vol = geom::oriented_volume_form(w, kBox);
    const double p[3] = {0.3, 0.2, -0.4};
    CHECK(geom::divergence(ex, vol, p) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("product rule on random polynomial data") {
    auto rng = oracles::rng(53);
    geom::VectorField X = poly_vector_field(random_quadratic(rng), random_quadratic(rng),
                                            random_quadratic(rng), kBox, true);
    const Poly3 fpoly = random_quadratic(rng);
    geom::FormField vol = geom::oriented_volume_form(constant_field(1.0), kBox);
    // div(f X) = f div X + L_X f
    geom::VectorField fX;
    fX.dim = 3;
    fX.domain = kBox;
    fX.components = [X, fpoly](const double* p, double* out) {
      X.eval(p, out);
      const double f = fpoly.eval(p);
      for (int c = 0; c < 3; ++c) out[c] *= f;
    };
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    for (int k = 0; k < 10; ++k) {
      const double p[3] = {u(rng), u(rng), u(rng)};
      const double f = fpoly.eval(p);
      double xv[3], gf[3] = {fpoly.derivative(0).eval(p), fpoly.derivative(1).eval(p),
                             fpoly.derivative(2).eval(p)};
      X.eval(p, xv);
      const double lxf = gf[0] * xv[0] + gf[1] * xv[1] + gf[2] * xv[2];
      const double lhs = geom::divergence(fX, vol, p);
      const double rhs = f * geom::divergence(X, vol, p) + lxf;
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    }
  }
}

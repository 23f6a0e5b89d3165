#include "charentropy/solver.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "charentropy/entropy.hpp"

using namespace charentropy;
namespace sol = charentropy::solver;

namespace {
const model::FluxModel kBurgers = model::make_flat_projective_model();
}

TEST_CASE("exact Riemann solutions for convex flux") {
  const auto F = sol::burgers_flux();

  SUBCASE("compressive data forms the half-speed shock") {
    CHECK(sol::riemann_exact(F, 1.0, 0.0, 0.49) == doctest::Approx(1.0));
    CHECK(sol::riemann_exact(F, 1.0, 0.0, 0.51) == doctest::Approx(0.0));
  }

  SUBCASE("expansive data opens a fan u = xi") {
    for (const double xi : {-0.8, -0.3, 0.0, 0.4, 0.9}) {
      CHECK(sol::riemann_exact(F, -1.0, 1.0, xi) == doctest::Approx(xi).epsilon(1e-10));
    }
    CHECK(sol::riemann_exact(F, -1.0, 1.0, -1.5) == doctest::Approx(-1.0));
    CHECK(sol::riemann_exact(F, -1.0, 1.0, 1.5) == doctest::Approx(1.0));
  }

  SUBCASE("equal states pass through") {
    CHECK(sol::riemann_exact(F, 0.3, 0.3, -2.0) == doctest::Approx(0.3));
  }

  SUBCASE("non-convex flux is rejected") {
    sol::ConvexFlux bad;
    bad.f = [](double u) { return u * u * u; };  // inflection at 0
    CHECK_THROWS_AS(sol::riemann_exact(bad, -1.0, 1.0, 0.0), InputError);
  }

  SUBCASE("riemann shocks agree with the jump admissibility scan") {
    auto rng = oracles::rng(17);
    std::uniform_real_distribution<double> coefd(0.1, 0.6);
    std::uniform_real_distribution<double> stated(-1.2, 1.2);
    int agreements = 0, total = 0;
    for (int rep = 0; rep < 10; ++rep) {
      // random strictly convex polynomial flux a2 u^2 + a4 u^4
      const double a2 = coefd(rng), a4 = coefd(rng);
      const Poly3 z1{{{a2, 0, 0, 2}, {a4, 0, 0, 4}}};
      const Poly3 z2{{{1, 0, 0, 1}}};
      const auto m = model::make_polynomial_model(z1, z2, Poly3{},
                                                  make_box3(-2, 2, -2, 2, -2, 2));
      for (int k = 0; k < 50; ++k) {
        double ul = stated(rng), ur = stated(rng);
        if (std::fabs(ul - ur) < 0.02) continue;
        const double fl = a2 * ul * ul + a4 * std::pow(ul, 4);
        const double fr = a2 * ur * ur + a4 * std::pow(ur, 4);
        const double s = (fl - fr) / (ul - ur);
        const double nrm = std::hypot(1.0, s);
        model::JumpData jd;
        jd.z = {0, 0};
        jd.nu = {1.0 / nrm, -s / nrm};
        jd.u_left = ul;
        jd.u_right = ur;
        const auto verdict = entropy::jump_admissibility(m, jd);
        const bool chord = oracles::oleinik_admissible(
            [&](double u) { return a2 * u * u + a4 * std::pow(u, 4); }, ul, ur, s);
        total += 1;
        agreements += (verdict.entropic == chord) ? 1 : 0;
      }
    }
    CHECK(agreements == total);
  }
}

TEST_CASE("Godunov reference scheme") {
  const auto F = sol::burgers_flux();

  SUBCASE("first-order convergence to the exact Riemann solution") {
    auto riemann_data = [](double x) { return x < 0 ? 1.0 : 0.0; };
    auto l1_error = [&](int nx) {
      const auto s = sol::godunov_solve(F, riemann_data, -1, 1, nx, 0.5, 0.9);
      const std::size_t jlast = s.ts.size() - 1;
      const double T = s.ts[jlast];
      double err = 0;
      for (std::size_t i = 0; i < s.xs.size(); ++i)
        err += std::fabs(s.at(i, jlast) - sol::riemann_exact(F, 1.0, 0.0, s.xs[i] / T)) *
               (2.0 / nx);
      return err;
    };
    const double e100 = l1_error(100);
    const double e200 = l1_error(200);
    CHECK(e100 <= 0.5 * 2.0 / 100 * 10);  // C * dx with a modest constant
    CHECK(std::log2(e100 / e200) >= 0.8);
  }

  SUBCASE("periodic boundaries conserve the cell total to roundoff") {
    auto smooth = [](double x) { return 0.3 + 0.2 * std::sin(3.14159265358979 * x); };
    const auto s = sol::godunov_solve(F, smooth, -1, 1, 128, 0.4, 0.8,
                                      sol::Boundary::kPeriodic);
    auto row_total = [&](std::size_t j) {
      double acc = 0;
      for (std::size_t i = 0; i < s.xs.size(); ++i) acc += s.at(i, j);
      return acc * (2.0 / 128);
    };
    const double first = row_total(0);
    for (std::size_t j = 1; j < s.ts.size(); ++j)
      CHECK(std::fabs(row_total(j) - first) <= 1e-12 * s.ts.size());
  }

  SUBCASE("entropy residual of the scheme output is bounded below") {
    const auto s = sol::godunov_solve(F, [](double x) { return x < 0 ? 1.0 : 0.0; }, -1, 1, 200,
                                      0.5, 0.9);
    const double dxs = s.xs[1] - s.xs[0];
    auto rng = oracles::rng(5);
    std::uniform_real_distribution<double> cx(-0.4, 0.6), ct(0.15, 0.35);
    for (int k = 0; k < 3; ++k) {
      const auto psi = entropy::make_total_bump(cx(rng), ct(rng), 0.5, 0.3, 0.12, 0.9);
      const double res = entropy::entropy_residual(kBurgers, s, psi);
      CHECK(res >= -10 * dxs);
    }
  }

  SUBCASE("CFL violation is rejected") {
    CHECK_THROWS_AS(sol::godunov_solve(F, [](double) { return 0.0; }, -1, 1, 32, 0.1, 1.2),
                    InputError);
  }
}

TEST_CASE("gluing classical solutions along a shock") {
  characteristics::GridSpec grid;
  grid.x0 = -1;
  grid.x1 = 1;
  grid.nx = 161;
  grid.t0 = 0;
  grid.t1 = 0.8;
  grid.nt = 81;

  SUBCASE("constants 1 and -1 give the stationary shock") {
    auto one = [](const double*) { return 1.0; };
    auto minus = [](const double*) { return -1.0; };
    const auto s = sol::glue_classical_pair(kBurgers, one, minus, {0.0, 0.0}, grid);
    REQUIRE(s.jumps.size() == 1);
    for (double xj : s.jumps[0].x) CHECK(std::fabs(xj) <= 1e-12);
    CHECK(s.jumps[0].u_left(0.4) == doctest::Approx(1.0));
    CHECK(s.jumps[0].u_right(0.4) == doctest::Approx(-1.0));
    // weak residual across the shock for a few bumps
    auto rng = oracles::rng(7);
    std::uniform_real_distribution<double> ct(0.25, 0.55);
    for (int k = 0; k < 5; ++k) {
      const auto phi = entropy::make_base_bump(0.0, ct(rng), 0.5, 0.2);
      CHECK(std::fabs(entropy::weak_rh_residual(kBurgers, s, phi)) <= 2e-3);
    }
  }

  SUBCASE("rarefaction-ordered constants cannot be glued") {
    auto one = [](const double*) { return 1.0; };
    auto minus = [](const double*) { return -1.0; };
    CHECK_THROWS_AS(sol::glue_classical_pair(kBurgers, minus, one, {0.0, 0.0}, grid),
                    NumericsError);
  }

  SUBCASE("equal values at the seed are rejected") {
    auto f = [](const double* z) { return z[0]; };
    CHECK_THROWS_AS(sol::glue_classical_pair(kBurgers, f, f, {0.2, 0.0}, grid), InputError);
  }

  SUBCASE("curved shock against a rarefaction wing") {
    const model::FluxModel wide =
        model::make_flat_projective_model(make_box3(-4, 4, -1, 4, -2, 2));
    characteristics::GridSpec g2;
    g2.x0 = 0.2;
    g2.x1 = 2.2;
    g2.nx = 201;
    g2.t0 = 0;
    g2.t1 = 1.5;
    g2.nt = 76;
    auto wing = [](const double* z) { return z[0] / (1.0 + z[1]); };
    auto zero = [](const double*) { return 0.0; };
    const auto s = sol::glue_classical_pair(wide, wing, zero, {1.0, 0.0}, g2);
    REQUIRE(s.jumps.size() == 1);
    // RH curve: x(t) = sqrt(1 + t)
    for (std::size_t k = 0; k < s.jumps[0].t.size(); k += 15) {
      const double t = s.jumps[0].t[k];
      CHECK(s.jumps[0].x_at(t) == doctest::Approx(std::sqrt(1.0 + t)).epsilon(1e-5));
    }
    const auto phi = entropy::make_base_bump(1.25, 0.7, 0.5, 0.4);
    CHECK(std::fabs(entropy::weak_rh_residual(wide, s, phi)) <= 2e-3);
  }
}

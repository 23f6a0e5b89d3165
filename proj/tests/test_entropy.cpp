#include "charentropy/entropy.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "charentropy/characteristics.hpp"

using namespace charentropy;
namespace ent = charentropy::entropy;

namespace {

const model::FluxModel kBurgers = model::make_flat_projective_model();

model::PiecewiseSection stationary_shock_section(double ul = 1.0, double ur = -1.0, int nx = 241,
                                                 int nt = 121) {
  auto left = [ul](const double*) { return ul; };
  auto right = [ur](const double*) { return ur; };
  return model::make_two_state_section(left, right, {0.0, 0.6}, {0.0, 0.0}, -0.6, 0.6, nx, 0.0,
                                       0.6, nt);
}

model::PiecewiseSection moving_shock_section(double ul, double ur, double speed, int nx = 241,
                                             int nt = 121) {
  auto left = [ul](const double*) { return ul; };
  auto right = [ur](const double*) { return ur; };
  return model::make_two_state_section(left, right, {0.0, 0.6}, {-0.3, -0.3 + 0.6 * speed}, -0.9,
                                       0.9, nx, 0.0, 0.6, nt);
}

}  // namespace

TEST_CASE("kruzhkov flux values") {
  const Vec2 z{0.0, 0.0};
  SUBCASE("coincident arguments vanish") {
    const Vec2 r = ent::kruzhkov_R(kBurgers, z, 0.7, 0.7);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 0.0);
  }
  SUBCASE("unit states") {
    const Vec2 r = ent::kruzhkov_R(kBurgers, z, 1.0, 0.0);
    CHECK(r[0] == doctest::Approx(0.5));
    CHECK(r[1] == doctest::Approx(1.0));
  }
  SUBCASE("symmetry in the two slots") {
    auto rng = oracles::rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 20; ++k) {
      const double a = u(rng), b = u(rng);
      const Vec2 r1 = ent::kruzhkov_R(kBurgers, z, a, b);
      const Vec2 r2 = ent::kruzhkov_R(kBurgers, z, b, a);
      CHECK(r1[0] == doctest::Approx(r2[0]).epsilon(1e-14));
      CHECK(r1[1] == doctest::Approx(r2[1]).epsilon(1e-14));
    }
  }
}

TEST_CASE("S operator against an adaptive quadrature oracle") {
  auto s = model::make_constant_section(1.0, -0.5, 0.5, 41, 0.0, 0.5, 21);
  model::Layer wide_layer;
  wide_layer.lower = [](const double*) { return -1.5; };
  wide_layer.upper = [](const double*) { return 1.5; };
  const auto theta = ent::make_total_bump(0.0, 0.25, 0.0, 0.4, 0.2, 0.9);
  const auto field = ent::S_operator(kBurgers, s, theta, &wide_layer);
  REQUIRE(!field.points.empty());
  bool checked_nonzero = false;
  for (std::size_t i = 0; i < field.points.size(); i += 7) {
    const Vec2 z = field.points[i];
    for (int comp = 0; comp < 2; ++comp) {
      const double oracle = oracles::adaptive_simpson(
          [&](double y) {
            const Vec2 r = ent::kruzhkov_R(kBurgers, z, 1.0, y);
            const double p[3] = {z[0], z[1], y};
            return r[comp] * theta.value(p);
          },
          -0.9, 0.9, 1e-10);
      CHECK(field.values[i][comp] == doctest::Approx(oracle).epsilon(1e-7));
      if (std::fabs(oracle) > 1e-3) checked_nonzero = true;
    }
  }
  CHECK(checked_nonzero);

  SUBCASE("linearity in the test density") {
    auto theta2 = theta;
    theta2.amplitude = 2.5;
    const auto f2 = ent::S_operator(kBurgers, s, theta2, &wide_layer);
    for (std::size_t i = 0; i < field.values.size(); i += 11) {
      CHECK(f2.values[i][0] == doctest::Approx(2.5 * field.values[i][0]).epsilon(1e-12));
      CHECK(f2.values[i][1] == doctest::Approx(2.5 * field.values[i][1]).epsilon(1e-12));
    }
  }

  SUBCASE("fixed-sign region: S = -int (Z(u) - Z(y)) theta dy above the section") {
    // theta supported in y in (0.45, 0.95), strictly above u = 0.2
    auto s2 = model::make_constant_section(0.2, -0.5, 0.5, 41, 0.0, 0.5, 21);
    model::Layer wide;
    wide.lower = [](const double*) { return -2.0; };
    wide.upper = [](const double*) { return 2.0; };
    const auto theta_hi = ent::make_total_bump(0.0, 0.25, 0.7, 0.4, 0.2, 0.25);
    const auto fhi = ent::S_operator(kBurgers, s2, theta_hi, &wide);
    for (std::size_t i = 0; i < fhi.points.size(); i += 9) {
      const Vec2 z = fhi.points[i];
      const double oracle = oracles::adaptive_simpson(
          [&](double y) {
            double zu[2], zy[2];
            kBurgers.eval_flux(z.data(), 0.2, zu);
            kBurgers.eval_flux(z.data(), y, zy);
            const double p[3] = {z[0], z[1], y};
            return -(zu[0] - zy[0]) * theta_hi.value(p);
          },
          0.45, 0.95, 1e-10);
      CHECK(fhi.values[i][0] == doctest::Approx(oracle).epsilon(1e-7));
    }
  }

  SUBCASE("support exiting the layer is an error") {
    model::Layer tight;
    tight.lower = [](const double*) { return -0.5; };
    tight.upper = [](const double*) { return 0.5; };
    CHECK_THROWS_AS(ent::S_operator(kBurgers, s, theta, &tight), InputError);
  }
}

TEST_CASE("weak Rankine-Hugoniot residual") {
  SUBCASE("classical solution from characteristics") {
    characteristics::GridSpec grid;
    grid.x0 = -1;
    grid.x1 = 1;
    grid.nx = 101;
    grid.t0 = 0;
    grid.nt = 51;
    const auto sol = characteristics::classical_solve(
        kBurgers, [](double x) { return 0.3 * std::sin(3.0 * x); }, 0.5, grid);
    REQUIRE(!sol.crossed);
    const double dx = sol.section.dx(), dt = sol.section.dt();
    auto rng = oracles::rng(31);
    std::uniform_real_distribution<double> cx(-0.4, 0.4), ct(0.12, 0.38);
    for (int k = 0; k < 5; ++k) {
      const auto phi = ent::make_base_bump(cx(rng), ct(rng), 0.45, 0.11);
      const double res = ent::weak_rh_residual(kBurgers, sol.section, phi);
      CHECK(std::fabs(res) <= 10 * (dx * dx + dt * dt));
    }
  }

  SUBCASE("shock at the exact RH speed has a tiny residual") {
    const auto s = moving_shock_section(1.0, 0.0, 0.5);
    const auto phi = ent::make_base_bump(0.0, 0.3, 0.45, 0.25);
    const double res = ent::weak_rh_residual(kBurgers, s, phi);
    const double dx = s.dx(), dt = s.dt();
    CHECK(std::fabs(res) <= 20 * (dx * dx + dt * dt));
  }

  SUBCASE("wrong-speed jump leaves the surface term") {
    // (1, 0) forced stationary: residual = -(Z1(1) - Z1(0)) int phi(0, t) dt
    const auto s = stationary_shock_section(1.0, 0.0);
    const auto phi = ent::make_base_bump(0.0, 0.3, 0.45, 0.25);
    const double res = ent::weak_rh_residual(kBurgers, s, phi);
    const double oracle =
        -0.5 * oracles::adaptive_simpson(
                   [&](double t) {
                     const double z[2] = {0.0, t};
                     return phi.value(z);
                   },
                   0.05, 0.55, 1e-12);
    CHECK(std::fabs(oracle) > 0.01);
    CHECK(res == doctest::Approx(oracle).epsilon(2e-3));
  }

  SUBCASE("support overlapping the boundary is an error") {
    const auto s = stationary_shock_section();
    const auto phi = ent::make_base_bump(0.5, 0.3, 0.2, 0.2);  // pokes past x = 0.6
    CHECK_THROWS_AS(ent::weak_rh_residual(kBurgers, s, phi), InputError);
  }
}

TEST_CASE("entropy residual sign and surface formula") {
  const auto psi = ent::make_total_bump(0.0, 0.3, 0.0, 0.4, 0.25, 0.95);

  SUBCASE("admissible stationary shock is nonnegative and matches the surface oracle") {
    const auto s = stationary_shock_section(1.0, -1.0);
    const double res = ent::entropy_residual(kBurgers, s, psi);
    // surface formula: int_Gamma int (1 - y^2) psi(0, t, y) dy dt
    const double oracle = oracles::adaptive_simpson(
        [&](double t) {
          return oracles::adaptive_simpson(
              [&](double y) {
                const double p[3] = {0.0, t, y};
                return (1.0 - y * y) * psi.value(p);
              },
              -0.95, 0.95, 1e-11);
        },
        0.05, 0.55, 1e-9);
    CHECK(res >= 0.0);
    CHECK(res == doctest::Approx(oracle).epsilon(5e-3));
  }

  SUBCASE("expansion jump gives a strictly negative residual") {
    const auto s = stationary_shock_section(-1.0, 1.0);
    const double res = ent::entropy_residual(kBurgers, s, psi);
    CHECK(res < -0.05);
  }

  SUBCASE("smooth classical solution stays near zero") {
    characteristics::GridSpec grid;
    grid.x0 = -1;
    grid.x1 = 1;
    grid.nx = 101;
    grid.t0 = 0;
    grid.nt = 51;
    const auto sol = characteristics::classical_solve(
        kBurgers, [](double x) { return 0.25 * std::cos(2.0 * x); }, 0.6, grid);
    const auto psi2 = ent::make_total_bump(0.0, 0.3, 0.25, 0.5, 0.25, 0.6);
    const double res = ent::entropy_residual(kBurgers, sol.section, psi2);
    const double dx = sol.section.dx(), dt = sol.section.dt();
    CHECK(std::fabs(res) <= 20 * (dx * dx + dt * dt));
  }

  SUBCASE("negative test amplitude is rejected") {
    const auto s = stationary_shock_section();
    auto bad = psi;
    bad.amplitude = -1.0;
    CHECK_THROWS_AS(ent::entropy_residual(kBurgers, s, bad), InputError);
  }
}

TEST_CASE("jump admissibility") {
  model::JumpData jd;
  jd.z = {0.0, 0.1};
  jd.nu = {1.0, 0.0};
  jd.u_left = 1.0;
  jd.u_right = -1.0;

  SUBCASE("admissible stationary shock") {
    const auto v = ent::jump_admissibility(kBurgers, jd);
    CHECK(std::fabs(v.rh_residual) <= 1e-14);
    CHECK(v.entropic);
    CHECK(v.margin >= 0.0);
  }

  SUBCASE("expansion jump fails with worst k at the midpoint") {
    model::JumpData exp_jump = jd;
    exp_jump.u_left = -1.0;
    exp_jump.u_right = 1.0;
    const auto v = ent::jump_admissibility(kBurgers, exp_jump);
    CHECK(std::fabs(v.rh_residual) <= 1e-14);
    CHECK(!v.entropic);
    CHECK(std::fabs(v.worst_k) <= 0.02);
    CHECK(v.margin == doctest::Approx(-1.0).epsilon(1e-3));
  }

  SUBCASE("degenerate jump is an input error") {
    model::JumpData same = jd;
    same.u_right = same.u_left;
    CHECK_THROWS_AS(ent::jump_admissibility(kBurgers, same), InputError);
  }

  SUBCASE("infinite-speed conormal is an error") {
    model::JumpData vert = jd;
    vert.nu = {0.0, 1.0};
    CHECK_THROWS_AS(ent::jump_admissibility(kBurgers, vert), NumericsError);
  }

  SUBCASE("shock-speed law: rh residual vanishes exactly at the chord speed") {
    auto rng = oracles::rng(23);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int k = 0; k < 200; ++k) {
      double ul = u(rng), ur = u(rng);
      if (std::fabs(ul - ur) < 0.05) continue;
      const double s = 0.5 * (ul + ur);
      const double nrm = std::hypot(1.0, s);
      model::JumpData j;
      j.z = {0.0, 0.0};
      j.nu = {1.0 / nrm, -s / nrm};
      j.u_left = ul;
      j.u_right = ur;
      const auto v = ent::jump_admissibility(kBurgers, j);
      CHECK(std::fabs(v.rh_residual) <= 1e-12);
      // off-speed residual is nonzero
      model::JumpData j2 = j;
      const double s2 = s + 0.3;
      const double nrm2 = std::hypot(1.0, s2);
      j2.nu = {1.0 / nrm2, -s2 / nrm2};
      const auto v2 = ent::jump_admissibility(kBurgers, j2);
      CHECK(std::fabs(v2.rh_residual) > 1e-3);
    }
  }

  SUBCASE("base-only reweighting never changes the verdict") {
    ScalarField lam;
    lam.value = [](const double* p) { return 2.0 + std::sin(p[0] + 2 * p[1]); };
    auto rng = oracles::rng(29);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (int k = 0; k < 50; ++k) {
      double ul = u(rng), ur = u(rng);
      if (std::fabs(ul - ur) < 0.05) continue;
      const double s = 0.5 * (ul + ur);
      const double nrm = std::hypot(1.0, s);
      model::JumpData j;
      j.z = {0.2, -0.1};
      j.nu = {1.0 / nrm, -s / nrm};
      j.u_left = ul;
      j.u_right = ur;
      const auto plain = ent::jump_admissibility(kBurgers, j);
      const auto weighted = ent::jump_admissibility_weighted(kBurgers, j, lam);
      CHECK(plain.entropic == weighted.entropic);
    }
  }
}

TEST_CASE("surface/volume identity for sections with jumps") {
  const auto theta = ent::make_total_bump(0.0, 0.3, 0.0, 0.35, 0.25, 0.95);
  const auto phi = ent::make_base_bump(0.0, 0.3, 0.5, 0.28);

  SUBCASE("single straight admissible shock") {
    const auto s = stationary_shock_section(1.0, -1.0, 301, 151);
    const auto rep = ent::volpert_identity_check(kBurgers, s, theta, phi);
    CHECK(std::fabs(rep.lhs) > 0.01);  // the identity is not vacuous
    CHECK(std::fabs(rep.difference) <= 5e-3);
  }

  SUBCASE("smooth section: both sides vanish") {
    auto s = model::make_constant_section(0.2, -0.6, 0.6, 121, 0.0, 0.6, 61);
    const auto rep = ent::volpert_identity_check(kBurgers, s, theta, phi);
    CHECK(std::fabs(rep.lhs) <= 1e-6);
    CHECK(std::fabs(rep.rhs) <= 1e-12);
  }

  SUBCASE("two parallel RH shocks: surface terms add") {
    // u = 2 | 0 | 2 with both jumps moving at the common RH speed 1
    auto s = model::make_section_grid(-1.4, 1.4, 281, 0.0, 0.4, 81);
    auto value_at = [](double x, double t) {
      if (x < -0.7 + t) return 2.0;
      if (x < 0.7 + t) return 0.0;
      return 2.0;
    };
    for (std::size_t j = 0; j < s.ts.size(); ++j)
      for (std::size_t i = 0; i < s.xs.size(); ++i) s.at(i, j) = value_at(s.xs[i], s.ts[j]);
    model::JumpCurve left;
    left.t = {0.0, 0.4};
    left.x = {-0.7, -0.3};
    left.u_left = [](double) { return 2.0; };
    left.u_right = [](double) { return 0.0; };
    model::JumpCurve right;
    right.t = {0.0, 0.4};
    right.x = {0.7, 1.1};
    right.u_left = [](double) { return 0.0; };
    right.u_right = [](double) { return 2.0; };
    s.jumps = {left, right};
    s.rebuild_jump_index();
    const auto theta2 = ent::make_total_bump(0.0, 0.2, 1.0, 1.3, 0.18, 1.4);
    const auto phi2 = ent::make_base_bump(0.0, 0.2, 1.35, 0.19);
    const auto rep = ent::volpert_identity_check(kBurgers, s, theta2, phi2);
    CHECK(std::fabs(rep.rhs) > 1e-3);
    CHECK(std::fabs(rep.difference) <= 2e-2 * std::max(1.0, std::fabs(rep.lhs)));
  }

  SUBCASE("missing traces are rejected") {
    auto s = stationary_shock_section();
    s.jumps[0].u_left = nullptr;
    CHECK_THROWS_AS(ent::volpert_identity_check(kBurgers, s, theta, phi), InputError);
  }
}

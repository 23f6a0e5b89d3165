#include "charentropy/model.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

using namespace charentropy;
using model::FluxModel;

TEST_CASE("flat projective model basics") {
  const FluxModel m = model::make_flat_projective_model();
  const double z[2] = {0.3, -0.2};
  double zf[2];
  m.eval_flux(z, 0.8, zf);
  CHECK(zf[0] == doctest::Approx(0.32));  // y^2/2
  CHECK(zf[1] == doctest::Approx(0.8));   // y
  CHECK(m.eval_source(z, 0.8) == 0.0);

  SUBCASE("characteristic field is d/dt + y d/dx") {
    const auto X = model::characteristic_field(m);
    const double p[3] = {0.1, 0.2, -0.6};
    double v[3];
    X.eval(p, v);
    CHECK(v[0] == doctest::Approx(-0.6));
    CHECK(v[1] == doctest::Approx(1.0));
    CHECK(v[2] == doctest::Approx(0.0));
  }

  SUBCASE("leaf invariants are present and consistent") {
    REQUIRE(m.leaf_invariants.size() == 2);
    const double p[3] = {0.5, 0.25, 0.4};
    CHECK(m.leaf_invariants[0].value(p) == doctest::Approx(0.4));
    CHECK(m.leaf_invariants[1].value(p) == doctest::Approx(0.5 - 0.25 * 0.4));
  }

  SUBCASE("reconstructed field matches the analytic jets at random points") {
    auto rng = oracles::rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const auto X = model::characteristic_field(m);
    FluxModel fd = m;  // same fluxes, jets dropped
    fd.flux_dy = nullptr;
    fd.flux_dz = nullptr;
    fd.poly = nullptr;
    const auto Xfd = model::characteristic_field(fd);
    for (int k = 0; k < 100; ++k) {
      const double p[3] = {u(rng), u(rng), u(rng)};
      double a[3], b[3];
      X.eval(p, a);
      Xfd.eval(p, b);
      for (int c = 0; c < 3; ++c) CHECK(std::fabs(a[c] - b[c]) <= 1e-6);
    }
  }
}

TEST_CASE("canonicalize") {
  const FluxModel m = model::make_flat_projective_model();
  const Box region = make_box3(-1, 1, -1, 1, -1, 1);

  SUBCASE("flat model is already canonical and idempotence is bit-exact") {
    model::EntropyDensity rho = model::unit_density(m);
    const auto once = model::canonicalize(rho, region);
    const auto twice = model::canonicalize(once, region);
    const double p[3] = {0.2, 0.3, 0.7};
    CHECK(once.weight.value(p) == doctest::Approx(1.0));
    CHECK(once.field_scale.value(p) == doctest::Approx(1.0));
    // second canonicalization returns the canonical density unchanged
    CHECK(twice.weight.value(p) == once.weight.value(p));
    CHECK(twice.field_scale.value(p) == once.field_scale.value(p));
    CHECK(twice.canonical);
  }

  SUBCASE("field scaling moves into the weight; the product is invariant") {
    model::EntropyDensity rho = model::unit_density(m);
    rho.field_scale = constant_field(2.0);
    const auto canon = model::canonicalize(rho, region);
    const double p[3] = {0.1, -0.4, 0.3};
    CHECK(canon.weight.value(p) == doctest::Approx(2.0));       // weight doubles
    CHECK(canon.field_scale.value(p) == doctest::Approx(1.0));  // field halves
    CHECK(canon.weight.value(p) * canon.field_scale.value(p) ==
          doctest::Approx(rho.weight.value(p) * rho.field_scale.value(p)));
  }

  SUBCASE("vanishing t-component is an error with a witness") {
    // Z = (y, y^2/2): dZ2/dy = y vanishes at y = 0
    const FluxModel bad = model::make_polynomial_model(
        Poly3{{{1, 0, 0, 1}}}, Poly3{{{0.5, 0, 0, 2}}}, Poly3{}, make_box3(-1, 1, -1, 1, -1, 1));
    model::EntropyDensity rho = model::unit_density(bad);
    CHECK_THROWS_AS(model::canonicalize(rho, region), NumericsError);
  }
}

TEST_CASE("section evaluation and layers") {
  SUBCASE("constant section inside a layer validates cleanly") {
    auto s = model::make_constant_section(0.0, -1, 1, 21, 0, 1, 11);
    model::Layer g;
    g.lower = [](const double*) { return -1.0; };
    g.upper = [](const double*) { return 1.0; };
    CHECK(model::validate_section(s, g).ok());
  }

  SUBCASE("an out-of-layer node is reported") {
    auto s = model::make_constant_section(2.0, -1, 1, 21, 0, 1, 11);
    model::Layer g;
    g.lower = [](const double*) { return -1.0; };
    g.upper = [](const double*) { return 1.0; };
    const auto rep = model::validate_section(s, g);
    CHECK(!rep.ok());
    CHECK(rep.violations.size() == 21 * 11);
  }

  SUBCASE("two-state shock with traces inside a padded layer") {
    auto left = [](const double*) { return 1.0; };
    auto right = [](const double*) { return -1.0; };
    auto s = model::make_two_state_section(left, right, {0.0, 1.0}, {0.0, 0.0}, -1, 1, 41, 0, 1,
                                           21);
    model::Layer g;
    g.lower = [](const double*) { return -1.5; };
    g.upper = [](const double*) { return 1.5; };
    CHECK(model::validate_section(s, g).ok());

    // side-aware evaluation near the jump
    CHECK(s.eval(-0.01, 0.5) == doctest::Approx(1.0));
    CHECK(s.eval(0.01, 0.5) == doctest::Approx(-1.0));
    CHECK(s.eval(-0.9, 0.5) == doctest::Approx(1.0));
    CHECK(s.eval(0.9, 0.5) == doctest::Approx(-1.0));
  }

  SUBCASE("default layer pads the value hull") {
    auto s = model::make_constant_section(0.25, -1, 1, 5, 0, 1, 5);
    const auto g = model::default_layer(s);
    const double z[2] = {0, 0.5};
    CHECK(g.lower(z) == doctest::Approx(-0.25));
    CHECK(g.upper(z) == doctest::Approx(0.75));
  }
}

TEST_CASE("general base dimension is stored but rejected by numerics") {
  model::FluxModel m = model::make_flat_projective_model();
  m.m = 3;
  CHECK_THROWS_WITH_AS(model::characteristic_field(m),
                       doctest::Contains("unsupported dimension"), InputError);
}

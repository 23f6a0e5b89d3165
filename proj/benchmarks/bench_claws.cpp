#include <benchmark/benchmark.h>

#include "charentropy/claws.hpp"
#include "charentropy/model.hpp"

using namespace charentropy;

namespace {

const model::FluxModel kBurgers = model::make_flat_projective_model();
const Box kWindow = make_box3(0.05, 1.05, -0.6, 0.6, -0.95, 0.95);

claws::FoliationCut characteristic_cut() {
  const auto surface = claws::flat_projective_cut_surface(make_box2(0.05, 1.05, -0.6, 0.6));
  return claws::build_cut(model::characteristic_field(kBurgers), surface, kWindow);
}

}  // namespace

static void CutProjection(benchmark::State& state) {
  const auto cut = characteristic_cut();
  double y = -0.7;
  for (auto _ : state) {
    y = y < 0.7 ? y + 0.013 : -0.7;
    benchmark::DoNotOptimize(cut.project({0.6, 0.2, y}));
  }
}
BENCHMARK(CutProjection);

static void TransportPointEvaluation(benchmark::State& state) {
  const auto cut = characteristic_cut();
  geom::FormField delta;
  delta.dim = 3;
  delta.degree = 1;
  delta.domain = kBurgers.domain;
  delta.coeffs = [](const double* p, double* c) {
    c[0] = -p[2];
    c[1] = 0.5 * p[2] * p[2];
    c[2] = 0;
  };
  ScalarField gamma;
  gamma.value = [](const double* p) { return -0.5 * p[2] * p[2]; };
  gamma.gradient = [](const double* p, double* g) {
    g[0] = 0;
    g[1] = 0;
    g[2] = -p[2];
  };
  claws::TransportOptions opt;
  opt.fill_grid = false;
  const auto tf = claws::transport_solve(cut, nullptr, gamma, delta,
                                         make_box3(0.45, 0.75, 0.05, 0.35, -0.8, 0.8), {9, 9, 17},
                                         opt);
  double y = -0.7;
  double out[3];
  for (auto _ : state) {
    y = y < 0.7 ? y + 0.017 : -0.7;
    const double p[3] = {0.6, 0.2, y};
    tf.exact(p, out);
    benchmark::DoNotOptimize(out[0]);
  }
}
BENCHMARK(TransportPointEvaluation);

#include <benchmark/benchmark.h>

#include "charentropy/entropy.hpp"
#include "charentropy/solver.hpp"

using namespace charentropy;

namespace {

const model::FluxModel kBurgers = model::make_flat_projective_model();

model::PiecewiseSection shock_section(int nx, int nt) {
  auto left = [](const double*) { return 1.0; };
  auto right = [](const double*) { return -1.0; };
  return model::make_two_state_section(left, right, {0.0, 0.6}, {0.0, 0.0}, -0.6, 0.6, nx, 0.0,
                                       0.6, nt);
}

}  // namespace

static void JumpAdmissibilityScan(benchmark::State& state) {
  model::JumpData jd;
  jd.z = {0.0, 0.1};
  jd.nu = {1.0, 0.0};
  jd.u_left = 1.0;
  jd.u_right = -1.0;
  for (auto _ : state) {
    auto v = entropy::jump_admissibility(kBurgers, jd, 1e-9,
                                         static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(JumpAdmissibilityScan)->Arg(257)->Arg(1025);

static void WeakResidualQuadrature(benchmark::State& state) {
  const auto s = shock_section(static_cast<int>(state.range(0)), state.range(0) / 2);
  const auto phi = entropy::make_base_bump(0.0, 0.3, 0.45, 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(entropy::weak_rh_residual(kBurgers, s, phi));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(WeakResidualQuadrature)->Arg(121)->Arg(241)->Arg(481)->Complexity();

static void EntropyResidualQuadrature(benchmark::State& state) {
  const auto s = shock_section(static_cast<int>(state.range(0)), state.range(0) / 2);
  const auto psi = entropy::make_total_bump(0.0, 0.3, 0.0, 0.4, 0.25, 0.95);
  for (auto _ : state) {
    benchmark::DoNotOptimize(entropy::entropy_residual(kBurgers, s, psi));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(EntropyResidualQuadrature)->Arg(121)->Arg(241)->Complexity();

static void GodunovStep(benchmark::State& state) {
  const auto F = solver::burgers_flux();
  const int nx = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto s = solver::godunov_solve(F, [](double x) { return x < 0 ? 1.0 : 0.0; }, -1, 1, nx,
                                   0.05, 0.9);
    benchmark::DoNotOptimize(s);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(GodunovStep)->Arg(200)->Arg(400)->Arg(800)->Complexity();

#include <benchmark/benchmark.h>

#include <vshp/sim.hpp>
#include <vshp/smallsignal.hpp>

using namespace vshp;

namespace {

PlantParams params_with_mode(PenstockMode mode) {
  PlantParams p = default_params();
  p.penstock_mode = mode;
  return p;
}

void BM_EulerDerivative(benchmark::State& state) {
  const Plant plant = Plant::assemble(ModelKind::Euler, default_params());
  const PlantInputs u{0.6, 1.0};
  const TrimResult tr = trim(plant, u.P_star, u.omega_star);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plant.derivatives(tr.state, u));
  }
}
BENCHMARK(BM_EulerDerivative);

void BM_IeeeDerivative(benchmark::State& state) {
  // includes the scalar head solve per evaluation
  const Plant plant = Plant::assemble(ModelKind::Ieee, default_params());
  const PlantInputs u{0.6, 1.0};
  const TrimResult tr = trim(plant, u.P_star, u.omega_star);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plant.derivatives(tr.state, u));
  }
}
BENCHMARK(BM_IeeeDerivative);

void BM_IntegrateStepLumped(benchmark::State& state) {
  const Plant plant = Plant::assemble(ModelKind::Euler, default_params());
  const PlantInputs u{0.6, 1.0};
  const TrimResult tr = trim(plant, u.P_star, u.omega_star);
  StepContext ctx;
  ctx.limiter.anchor = plant.governor_signals(tr.state, u).g_sat;
  Eigen::VectorXd x = tr.state;
  for (auto _ : state) {
    x = integrate_step(plant, x, u, 1e-3, ctx);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_IntegrateStepLumped);

void BM_IntegrateStepDelayLine(benchmark::State& state) {
  const PlantParams p = params_with_mode(PenstockMode::TravellingWaveDelay);
  const Plant plant = Plant::assemble(ModelKind::Euler, p);
  const PlantInputs u{0.6, 1.0};
  const TrimResult tr = trim(plant, u.P_star, u.omega_star);
  StepContext ctx;
  ctx.has_delay = true;
  ctx.delay = DelayLine(1e-3, 2 * p.waterway.T_e + 4e-3);
  ctx.delay.fill(0.0, p.waterway.Z_0 * tr.outputs.q);
  ctx.limiter.anchor = plant.governor_signals(tr.state, u).g_sat;
  Eigen::VectorXd x = tr.state;
  for (auto _ : state) {
    x = integrate_step(plant, x, u, 1e-3, ctx);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_IntegrateStepDelayLine);

void BM_TrimEuler(benchmark::State& state) {
  const Plant plant = Plant::assemble(ModelKind::Euler, default_params());
  for (auto _ : state) {
    benchmark::DoNotOptimize(trim(plant, 0.6, 1.0));
  }
}
BENCHMARK(BM_TrimEuler);

void BM_LinearizeAndModes(benchmark::State& state) {
  const Plant plant = Plant::assemble(ModelKind::Euler, default_params());
  const TrimResult tr = trim(plant, 0.6, 1.0);
  for (auto _ : state) {
    const LinearModel m = linearize(plant, tr.state, {0.6, 1.0});
    benchmark::DoNotOptimize(modes(m.A, m.state_labels));
  }
}
BENCHMARK(BM_LinearizeAndModes);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "spindle/bbm.hpp"
#include "spindle/diffusion.hpp"
#include "spindle/special_functions.hpp"
#include "spindle/spine.hpp"

namespace {

using namespace spindle;

void BM_Philox(benchmark::State& state) {
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng());
}
BENCHMARK(BM_Philox);

void BM_Normal(benchmark::State& state) {
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
}
BENCHMARK(BM_Normal);

// Argument: horizon in whole time units.
void BM_SimulateTree(benchmark::State& state) {
  const auto p = make_params(0.5);
  const auto h = make_horizon(static_cast<double>(state.range(0)));
  std::uint64_t i = 0;
  for (auto _ : state) {
    RngStream rng(2, i++);
    benchmark::DoNotOptimize(simulate_tree(p, make_initial(1.0), h, {}, rng));
  }
}
BENCHMARK(BM_SimulateTree)->Arg(2)->Arg(6);

void BM_SampleQTree(benchmark::State& state) {
  const auto p = make_params(0.5);
  const auto h = make_horizon(static_cast<double>(state.range(0)));
  std::uint64_t i = 0;
  for (auto _ : state) {
    RngStream rng(3, i++);
    benchmark::DoNotOptimize(sample_q_tree(p, make_initial(1.0), h, {}, rng));
  }
}
BENCHMARK(BM_SampleQTree)->Arg(2)->Arg(6);

void BM_BesselBridge(benchmark::State& state) {
  const auto grid = uniform_grid(1.0, static_cast<std::size_t>(state.range(0)) + 1);
  RngStream rng(4, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_bessel_bridge({0.5, 1.0, 1.0, grid}, rng));
}
BENCHMARK(BM_BesselBridge)->Arg(64)->Arg(1024);

void BM_BridgeSupCdf(benchmark::State& state) {
  const auto barrier = make_barrier(0.0, state.range(0) / 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(reflected_bridge_sup_cdf(barrier));
}
BENCHMARK(BM_BridgeSupCdf)->Arg(20)->Arg(80);

void BM_ThetaResidual(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_theta_identity_residual(0.5));
}
BENCHMARK(BM_ThetaResidual);

}  // namespace
BENCHMARK_MAIN();

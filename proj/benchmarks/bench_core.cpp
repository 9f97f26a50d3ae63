#include <benchmark/benchmark.h>

#include "jumpsde/calculus.hpp"
#include "jumpsde/integral.hpp"
#include "jumpsde/jacobian.hpp"
#include "jumpsde/kernel.hpp"

using namespace jumpsde;

static void BM_SampleNoise(benchmark::State& state) {
  const auto s = get_scenario("rot2d");
  const auto grid = build_grid(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_noise(grid, 1, s.marks, ++seed));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleNoise)->Arg(256)->Arg(4096);

static void BM_RefineNoise(benchmark::State& state) {
  const auto s = get_scenario("rot2d");
  const auto noise = sample_noise(build_grid(0.0, 1.0, 256), 1, s.marks, 1);
  for (auto _ : state) benchmark::DoNotOptimize(refine_noise(noise, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_RefineNoise)->Arg(2)->Arg(32);

static void BM_SimulatePath(benchmark::State& state) {
  const auto s = get_scenario("rot2d");
  const auto noise = sample_noise(build_grid(0.0, 1.0, static_cast<std::size_t>(state.range(0))), 1, s.marks, 1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_path(s, Vector::Unit(2, 0), noise));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulatePath)->Arg(1024);

static void BM_SimulateJacobian(benchmark::State& state) {
  const auto s = get_scenario("rot2d");
  const auto noise = sample_noise(build_grid(0.0, 1.0, 1024), 1, s.marks, 1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_jacobian(s, Vector::Unit(2, 0), noise));
}
BENCHMARK(BM_SimulateJacobian);

static void BM_ItoSeries(benchmark::State& state) {
  const auto s = get_scenario("rot2d");
  const auto noise = sample_noise(build_grid(0.0, 1.0, 1024), 1, s.marks, 1);
  const auto path = simulate_path(s, Vector::Unit(2, 0), noise);
  const auto f = get_candidate("radius2", 2).u;
  for (auto _ : state) benchmark::DoNotOptimize(ito_series(f, s, path, noise));
}
BENCHMARK(BM_ItoSeries);

static void BM_CompositeConsistency(benchmark::State& state) {
  const auto s = get_scenario("rot2d");
  const auto field = get_field_setup("rot2d-mixed", 2, 1);
  const auto noise = sample_noise(build_grid(0.0, 1.0, 512), 1, s.marks, 1);
  for (auto _ : state) benchmark::DoNotOptimize(composite_consistency(field, s, Vector::Unit(2, 0), noise));
}
BENCHMARK(BM_CompositeConsistency);

static void BM_KernelSpde(benchmark::State& state) {
  const auto s = get_scenario("ou1d", {{"sigma", 0.3}, {"rate", 1.0}});
  const auto k = gaussian_kernel(Vector::Zero(1), 1.0);
  const auto noise = sample_noise(build_grid(0.0, 0.5, 1000), 1, s.marks, 1);
  const SpatialGrid space{-6.0, 6.0, static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(kernel_spde_solve(k, s, noise, space));
}
BENCHMARK(BM_KernelSpde)->Arg(401)->Arg(801)->Unit(benchmark::kMillisecond);

static void BM_CheckConditions(benchmark::State& state) {
  const auto s = get_scenario("rot2d");
  const auto u = get_candidate("radius2", 2);
  const double t0[] = {0.0};
  const auto lattice = condition_lattice(s.box, 21, t0);
  for (auto _ : state) benchmark::DoNotOptimize(check_conditions(u, s, lattice));
}
BENCHMARK(BM_CheckConditions);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "lmaze/droplet.hpp"
#include "lmaze/field.hpp"
#include "lmaze/oracle.hpp"

using namespace lmaze;

namespace {

// 256 x 256 cells: 128 mm across at 0.5 mm.
MazeSpec big_ring() { return generate_ring_maze({.rings = 9, .diameter_mm = 128.0, .seed = 7}); }

DynamicsParams ring_params() {
  DynamicsParams p;
  p.threshold_fraction = 0.2;
  p.turn_length_mm = 16.0;
  return p;
}

void BM_SolvePotential(benchmark::State& state) {
  const MazeSpec m = big_ring();
  for (auto _ : state) {
    auto sol = solve_potential(m);
    benchmark::DoNotOptimize(sol.potential.values.data());
    state.counters["iterations"] = sol.report.iterations;
  }
}
BENCHMARK(BM_SolvePotential)->Unit(benchmark::kMillisecond);

void BM_CurrentDensity(benchmark::State& state) {
  const MazeSpec m = big_ring();
  const auto phi = solve_potential(m).potential;
  const auto sigma = conductivity_grid(m);
  for (auto _ : state) benchmark::DoNotOptimize(current_density(phi, sigma).values.data());
}
BENCHMARK(BM_CurrentDensity)->Unit(benchmark::kMillisecond);

void BM_LeePath(benchmark::State& state) {
  const MazeSpec m = big_ring();
  for (auto _ : state) benchmark::DoNotOptimize(shortest_electrode_path(m).cells.data());
}
BENCHMARK(BM_LeePath)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const MazeSpec m = big_ring();
  const auto J = current_density(solve_potential(m).potential, conductivity_grid(m));
  const DynamicsParams p = ring_params();
  const VectorField drive = driving_field(J, p.force_source);
  for (auto _ : state) {
    const Trajectory t = simulate(m, p, drive);
    state.counters["steps"] = static_cast<double>(t.samples.size() - 1);
  }
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

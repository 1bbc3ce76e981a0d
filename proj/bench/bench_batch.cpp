// Serial reference vs OpenMP batch kernels on a sweep of independent runs.
//
//   ./build/bench/bench_batch --benchmark_min_time=0.2

#include <benchmark/benchmark.h>

#include <vector>

#include "dampsym/diagnostics.hpp"
#include "dampsym/parallel.hpp"

namespace {

using namespace dampsym;

// Damping sweep on the 2-D oscillator, one run per damping scale.
std::vector<RunSpec> damping_sweep(std::size_t runs, std::size_t steps, Method method) {
  std::vector<RunSpec> out;
  out.reserve(runs);
  for (std::size_t i = 0; i < runs; ++i) {
    const double s = 1.0 + 0.25 * static_cast<double>(i);
    DampedLinearSystem sys =
        make_system({{3.0, 0.0}, {0.0, 3.0}}, {{0.03 * s, -0.01 * s}, {-0.01 * s, 0.01 * s}});
    out.push_back({std::move(sys), PhaseState{0.0, {0.1, 0.2}, {0.1, 0.2}}, 0.2, steps, method});
  }
  return out;
}

void BM_IntegrateSerial(benchmark::State& state) {
  const auto runs = damping_sweep(static_cast<std::size_t>(state.range(0)), 500,
                                  Method::midpoint_indirect);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_batch_serial(runs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_IntegrateParallel(benchmark::State& state) {
  const auto runs = damping_sweep(static_cast<std::size_t>(state.range(0)), 500,
                                  Method::midpoint_indirect);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_batch(runs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PropagateSerial(benchmark::State& state) {
  const auto runs = damping_sweep(static_cast<std::size_t>(state.range(0)), 5000, Method::rk4);
  for (auto _ : state) benchmark::DoNotOptimize(propagate_batch_serial(runs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PropagateParallel(benchmark::State& state) {
  const auto runs = damping_sweep(static_cast<std::size_t>(state.range(0)), 5000, Method::rk4);
  for (auto _ : state) benchmark::DoNotOptimize(propagate_batch(runs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ConvergenceSerial(benchmark::State& state) {
  const DampedLinearSystem sys = make_system({{2.0}}, {{0.05}});
  const PhaseState z0{0.0, {0.1}, {0.2}};
  for (auto _ : state)
    benchmark::DoNotOptimize(
        convergence_study_serial(sys, z0, 0.1, 6, 10.0, Method::midpoint_direct));
}

void BM_ConvergenceParallel(benchmark::State& state) {
  const DampedLinearSystem sys = make_system({{2.0}}, {{0.05}});
  const PhaseState z0{0.0, {0.1}, {0.2}};
  for (auto _ : state)
    benchmark::DoNotOptimize(convergence_study(sys, z0, 0.1, 6, 10.0, Method::midpoint_direct));
}

}  // namespace

BENCHMARK(BM_IntegrateSerial)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IntegrateParallel)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PropagateSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PropagateParallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvergenceSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvergenceParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

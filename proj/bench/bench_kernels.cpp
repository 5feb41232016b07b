// Serial reference vs OpenMP kernels. Range argument is log2 of the grid size.
//   bench_kernels --benchmark_filter=rb_sweep

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "fif/fifcore.hpp"
#include "fif/kernels.hpp"

namespace {

using namespace fif;

std::vector<double> walk(std::size_t n) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> d(0, 1);
  std::vector<double> v(n);
  double z = 0;
  for (auto& x : v) x = z += d(rng);
  return v;
}

const AlphaFractalSystem& system() {
  static const AlphaFractalSystem sys =
      make_system(Partition({0, 0.25, 0.5, 1}), expr::parse("sin(5*x)"), expr::parse("sin(5)*x"),
                  {expr::parse("0.3*x"), expr::parse("0.2"), expr::parse("-0.4*cos(x)")});
  return sys;
}

template <bool Par>
void rb_sweep(benchmark::State& state) {
  const std::size_t grid = std::size_t{1} << state.range(0);
  const kernels::RbPlan plan = make_plan(system(), grid);
  const std::vector<double> in = walk(grid + 1);
  std::vector<double> out(grid + 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Par ? kernels::parallel::rb_sweep(plan, in, out) : kernels::serial::rb_sweep(plan, in, out));
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(grid));
}

template <bool Par>
void block_ranges(benchmark::State& state) {
  const std::size_t grid = std::size_t{1} << state.range(0);
  const std::vector<double> v = walk(grid + 1);
  std::vector<double> r(grid / 64);
  for (auto _ : state) {
    if (Par) {
      kernels::parallel::block_ranges(v, 64, r);
    } else {
      kernels::serial::block_ranges(v, 64, r);
    }
    benchmark::DoNotOptimize(r.data());
  }
}

template <bool Par>
void dyadic_hoelder(benchmark::State& state) {
  const std::size_t grid = std::size_t{1} << state.range(0);
  const std::vector<double> v = walk(grid + 1);
  const double h = 1.0 / double(grid);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Par ? kernels::parallel::dyadic_hoelder(v, h, 0.5)
                                 : kernels::serial::dyadic_hoelder(v, h, 0.5));
  }
}

template <bool Par>
void lower_oscillation(benchmark::State& state) {
  const std::size_t grid = std::size_t{1} << state.range(0);
  const std::vector<double> v = walk(grid + 1);
  const double h = 1.0 / double(grid);
  std::vector<std::size_t> reaches;
  for (std::size_t d = grid / 16; d >= 1; d /= 2) reaches.push_back(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Par ? kernels::parallel::lower_oscillation(v, h, 0.5, reaches)
                                 : kernels::serial::lower_oscillation(v, h, 0.5, reaches));
  }
}

template <bool Par>
void total_variation(benchmark::State& state) {
  const std::size_t grid = std::size_t{1} << state.range(0);
  const std::vector<double> v = walk(grid + 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Par ? kernels::parallel::total_variation(v) : kernels::serial::total_variation(v));
  }
}

}  // namespace

BENCHMARK(rb_sweep<false>)->Name("rb_sweep/serial")->DenseRange(14, 20, 3);
BENCHMARK(rb_sweep<true>)->Name("rb_sweep/parallel")->DenseRange(14, 20, 3);
BENCHMARK(block_ranges<false>)->Name("block_ranges/serial")->DenseRange(14, 20, 3);
BENCHMARK(block_ranges<true>)->Name("block_ranges/parallel")->DenseRange(14, 20, 3);
BENCHMARK(dyadic_hoelder<false>)->Name("dyadic_hoelder/serial")->DenseRange(14, 20, 3);
BENCHMARK(dyadic_hoelder<true>)->Name("dyadic_hoelder/parallel")->DenseRange(14, 20, 3);
BENCHMARK(lower_oscillation<false>)->Name("lower_oscillation/serial")->Arg(12)->Arg(14);
BENCHMARK(lower_oscillation<true>)->Name("lower_oscillation/parallel")->Arg(12)->Arg(14);
BENCHMARK(total_variation<false>)->Name("total_variation/serial")->DenseRange(14, 20, 3);
BENCHMARK(total_variation<true>)->Name("total_variation/parallel")->DenseRange(14, 20, 3);

BENCHMARK_MAIN();

// Serial reference kernels against the OpenMP ones on the default grid.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pinwheel/kernels.hpp"

using namespace pinwheel;

namespace {

struct Fixture {
  GridPtr grid = make_grid(96, 96, 32, 20.0);
  std::vector<double> a, b, out;
  Fixture() : a(grid->size()), b(grid->size()), out(grid->size()) {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (std::size_t n = 0; n < a.size(); ++n) {
      a[n] = ud(rng);
      b[n] = ud(rng);
    }
  }
};

Fixture& fx() {
  static Fixture f;
  return f;
}

template <bool Parallel>
void BM_apply_stiffness(benchmark::State& st) {
  auto& f = fx();
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::omp::apply_stiffness(*f.grid, f.a, f.out);
    else
      kernels::serial::apply_stiffness(*f.grid, f.a, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

template <bool Parallel>
void BM_stiffness_form(benchmark::State& st) {
  auto& f = fx();
  for (auto _ : st)
    benchmark::DoNotOptimize(Parallel ? kernels::omp::stiffness_form(*f.grid, f.a, f.b)
                                      : kernels::serial::stiffness_form(*f.grid, f.a, f.b));
}

template <bool Parallel>
void BM_weighted_pow4(benchmark::State& st) {
  auto& f = fx();
  for (auto _ : st)
    benchmark::DoNotOptimize(Parallel ? kernels::omp::weighted_pow(*f.grid, f.a, 4.0)
                                      : kernels::serial::weighted_pow(*f.grid, f.a, 4.0));
}

template <bool Parallel>
void BM_reaction(benchmark::State& st) {
  auto& f = fx();
  const std::span<const double> parts[2] = {f.a, f.b};
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::omp::reaction(*f.grid, parts, 0, -100.0, f.out);
    else
      kernels::serial::reaction(*f.grid, parts, 0, -100.0, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

}  // namespace

BENCHMARK(BM_apply_stiffness<false>)->Name("apply_stiffness/serial");
BENCHMARK(BM_apply_stiffness<true>)->Name("apply_stiffness/omp");
BENCHMARK(BM_stiffness_form<false>)->Name("stiffness_form/serial");
BENCHMARK(BM_stiffness_form<true>)->Name("stiffness_form/omp");
BENCHMARK(BM_weighted_pow4<false>)->Name("weighted_pow4/serial");
BENCHMARK(BM_weighted_pow4<true>)->Name("weighted_pow4/omp");
BENCHMARK(BM_reaction<false>)->Name("reaction/serial");
BENCHMARK(BM_reaction<true>)->Name("reaction/omp");

BENCHMARK_MAIN();

// Serial reference vs OpenMP kernels: RHS evaluation, characteristic sweep, full solve.
#include <benchmark/benchmark.h>

#include <vector>

#include "backstep/characteristics.hpp"
#include "backstep/kernel.hpp"
#include "backstep/sweep.hpp"
#include "fixtures.hpp"

using namespace backstep;

namespace {

struct Setup {
  ValidatedProblem vp;
  Vector c;
  ReductionFields rf;
  BoundaryData bd;
  PathPlan plan;
  std::vector<double> k, l, rhs_k, rhs_l, out_k, out_l;

  explicit Setup(int m)
      : vp(validate_problem(fixtures::variable_pair(1.0), Grid{m, 1e-4})),
        c(fixtures::vec({1.0, 1.0})),
        rf(compute_reduction(vp, c)),
        bd(assemble_boundary_data(vp, c)) {
    std::vector<TravelTime> travel;
    for (int i = 0; i < vp.n(); ++i) travel.emplace_back(vp, i);
    plan = plan_characteristics(vp, bd, travel);
    KernelOptions opts;
    opts.parallel = false;
    const KernelField f = solve_kernel(rf, bd, opts);
    k = f.k;
    l = f.l;
    rhs_k.resize(k.size());
    rhs_l.resize(l.size());
    out_k = k;
    out_l = l;
  }
};

template <bool Parallel>
void BM_Rhs(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if (Parallel) evaluate_rhs_parallel(s.rf, s.k, s.l, s.rhs_k, s.rhs_l);
    else evaluate_rhs_serial(s.rf, s.k, s.l, s.rhs_k, s.rhs_l);
    benchmark::DoNotOptimize(s.rhs_k.data());
  }
}

template <bool Parallel>
void BM_Sweep(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  evaluate_rhs_serial(s.rf, s.k, s.l, s.rhs_k, s.rhs_l);
  for (auto _ : state) {
    if (Parallel) sweep_parallel(s.plan, s.rhs_k, s.rhs_l, s.out_k, s.out_l);
    else sweep_serial(s.plan, s.rhs_k, s.rhs_l, s.out_k, s.out_l);
    benchmark::DoNotOptimize(s.out_k.data());
  }
}

template <bool Parallel>
void BM_Solve(benchmark::State& state) {
  const ValidatedProblem vp =
      validate_problem(fixtures::variable_pair(1.0), Grid{static_cast<int>(state.range(0)), 1e-4});
  KernelOptions opts;
  opts.parallel = Parallel;
  for (auto _ : state) benchmark::DoNotOptimize(solve_kernel(vp, fixtures::vec({1.0, 1.0}), opts));
}

}  // namespace

BENCHMARK(BM_Rhs<false>)->Name("rhs/serial")->Arg(64)->Arg(128);
BENCHMARK(BM_Rhs<true>)->Name("rhs/parallel")->Arg(64)->Arg(128);
BENCHMARK(BM_Sweep<false>)->Name("sweep/serial")->Arg(64)->Arg(128);
BENCHMARK(BM_Sweep<true>)->Name("sweep/parallel")->Arg(64)->Arg(128);
BENCHMARK(BM_Solve<false>)->Name("solve/serial")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Solve<true>)->Name("solve/parallel")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

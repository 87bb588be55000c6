#include <benchmark/benchmark.h>

#include "coordlab/dsbs.hpp"
#include "coordlab/feasibility.hpp"
#include "coordlab/regions.hpp"
#include "coordlab/scheme_sim.hpp"

namespace {

using namespace coordlab;

void BM_FeasibilityLp(benchmark::State& state) {
  JointTable qxz = dsbs_joint(0.1), qxy = dsbs_joint(0.26);
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_compatible_channel(qxz, qxy));
  }
}
BENCHMARK(BM_FeasibilityLp);

void BM_GapGrid(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(figure4_grid(0.05, 0.45, 0.05, 0.45,
                                          static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_GapGrid)->Arg(9)->Arg(41);

void BM_MinRateRcs(benchmark::State& state) {
  JointTable qxz = dsbs_joint(0.1), qxy = dsbs_joint(0.26);
  SolverOptions opts;
  opts.starts = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_rate_rcs(qxz, qxy, 0.0, opts));
  }
}
BENCHMARK(BM_MinRateRcs)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ExactQxy(benchmark::State& state) {
  GapInputs g(0.2, 0.1);
  RegionWitness w = case5_witness(g);
  int n = static_cast<int>(state.range(0));
  SchemeSpec spec(w.joint, 0.65, 0.15, 0.0, n);
  Codebook cb = sample_codebook(spec, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_q_xy(cb, spec.p));
  }
}
BENCHMARK(BM_ExactQxy)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_InducedPxy(benchmark::State& state) {
  GapInputs g(0.2, 0.1);
  RegionWitness w = case5_witness(g);
  int n = static_cast<int>(state.range(0));
  SchemeSpec spec(w.joint, 0.65, 0.15, 0.0, n);
  Codebook cb = sample_codebook(spec, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(induced_p_xy(cb, spec));
  }
}
BENCHMARK(BM_InducedPxy)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

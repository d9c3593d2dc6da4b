// Serial vs OpenMP Følner averaging on representative workloads.

#include <benchmark/benchmark.h>

#include "ncx/systems.hpp"

namespace {

using namespace ncx;

struct Workload {
  GroupAction action;
  std::vector<GroupWord> F;
  Element x;
};

Workload make_workload(long k, int coord_budget) {
  Rng rng(424242);
  GroupAction action = random_z2_system(rng, coord_budget);
  Workload w{action,
             folner_sets(FolnerSchedule::box(), action.group, k),
             random_hermitian(action.algebra, rng)};
  return w;
}

void BM_average_serial(benchmark::State& state) {
  Workload w = make_workload(state.range(0), 64);
  for (auto _ : state) {
    Element avg = folner_average_serial(w.action, w.F, w.x);
    benchmark::DoNotOptimize(avg);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<long>(w.F.size()));
}

void BM_average_parallel(benchmark::State& state) {
  Workload w = make_workload(state.range(0), 64);
  for (auto _ : state) {
    Element avg = folner_average(w.action, w.F, w.x);
    benchmark::DoNotOptimize(avg);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<long>(w.F.size()));
}

BENCHMARK(BM_average_serial)->Arg(16)->Arg(48)->Arg(96);
BENCHMARK(BM_average_parallel)->Arg(16)->Arg(48)->Arg(96);

}  // namespace

BENCHMARK_MAIN();

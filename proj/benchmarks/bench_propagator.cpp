#include <benchmark/benchmark.h>

#include "heomflow/hierarchy_index.hpp"
#include "heomflow/measures.hpp"
#include "heomflow/propagator.hpp"
#include "heomflow/scan.hpp"

using namespace heomflow;

namespace {

RunConfig preset(int which) { return which == 0 ? dimer_preset() : fmo_preset(); }

// One right-hand-side evaluation over the whole hierarchy.
void BM_GeneratorApply(benchmark::State& st) {
  const auto cfg = preset(static_cast<int>(st.range(0)));
  const auto sys = cfg.physical_system();
  auto table = std::make_shared<const HierarchyIndexTable>(sys.model.n_sites(), cfg.hierarchy.max_tier);
  const HeomGenerator gen(sys.model, sys.bath, table, Representation::Normalized);
  auto in = HierarchyState::from_system(table, site_projector(sys.model.n_sites(), 0), Representation::Normalized);
  HierarchyState out(table, Representation::Normalized);
  // some nonzero ADOs so the kernel does real work
  gen.apply(in.data(), out.data());
  for (auto _ : st) {
    gen.apply(out.data(), in.data());
    benchmark::DoNotOptimize(in.data().data());
  }
  st.counters["ados"] = static_cast<double>(table->ado_count());
}
BENCHMARK(BM_GeneratorApply)->Arg(0)->Arg(1)->ArgNames({"preset"});

void BM_IndexTable(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const int tier = static_cast<int>(st.range(1));
  for (auto _ : st) {
    HierarchyIndexTable t(n, tier);
    benchmark::DoNotOptimize(t.size());
  }
}
BENCHMARK(BM_IndexTable)->Args({2, 39})->Args({7, 4})->Args({7, 8});

// A single 1 ps fixed-pair run on the dimer preset.
void BM_PairDistance(benchmark::State& st) {
  const auto cfg = dimer_preset();
  const auto sys = cfg.physical_system();
  auto s = cfg.propagation_settings();
  s.t_end_fs = 1000.0;
  for (auto _ : st) {
    auto d = pair_trace_distance(site_projector(2, 0), site_projector(2, 1), sys.model, sys.bath, s);
    benchmark::DoNotOptimize(d.values.data());
  }
}
BENCHMARK(BM_PairDistance)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "tstream/experiment.hpp"
#include "tstream/ingest.hpp"
#include "tstream/oracle.hpp"
#include "tstream/sal_parser.hpp"

using namespace tstream;

namespace {

std::shared_ptr<const query::QueryPlan> triangle() {
  static auto plan = [] {
    query::PlanOptions o;
    o.id = "triangle";
    return std::make_shared<const query::QueryPlan>(
        query::plan(sal::parseQuery(bench::kTriangleQuery), o));
  }();
  return plan;
}

std::vector<TemporalEdge> stream(std::size_t n) {
  ingest::GeneratorConfig g;
  g.vertexPoolSize = 40;
  g.edgesPerWorker = n;
  g.ratePerWorker = 20;
  g.seed = 11;
  return ingest::generate(g, 0);
}

void BM_EnumerateSerial(benchmark::State& state) {
  auto edges = stream(state.range(0));
  auto plan = triangle();
  for (auto _ : state) benchmark::DoNotOptimize(oracle::enumerateReference(*plan, edges));
  state.SetItemsProcessed(state.iterations() * edges.size());
}

void BM_EnumerateParallel(benchmark::State& state) {
  auto edges = stream(state.range(0));
  auto plan = triangle();
  for (auto _ : state) benchmark::DoNotOptimize(oracle::enumerateIndexed(*plan, edges));
  state.SetItemsProcessed(state.iterations() * edges.size());
}

void BM_BoundSerial(benchmark::State& state) {
  auto edges = stream(state.range(0));
  auto plan = triangle();
  auto set = oracle::enumerateIndexed(*plan, edges);
  std::vector<oracle::Match> matches(set.begin(), set.end());
  for (auto _ : state) benchmark::DoNotOptimize(oracle::windowBound(*plan, edges, matches));
  state.counters["matches"] = static_cast<double>(matches.size());
}

void BM_BoundParallel(benchmark::State& state) {
  auto edges = stream(state.range(0));
  auto plan = triangle();
  auto set = oracle::enumerateIndexed(*plan, edges);
  std::vector<oracle::Match> matches(set.begin(), set.end());
  for (auto _ : state)
    benchmark::DoNotOptimize(oracle::windowBoundParallel(*plan, edges, matches));
  state.counters["matches"] = static_cast<double>(matches.size());
}

}  // namespace

BENCHMARK(BM_EnumerateSerial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnumerateParallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoundSerial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoundParallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

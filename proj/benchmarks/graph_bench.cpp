#include "oracles.hpp"
#include "support.hpp"

#include <codegraph/query.hpp>
#include <codegraph/snapshot.hpp>

#include <benchmark/benchmark.h>

using namespace cgtest;

namespace {

void BM_QueryGolden(benchmark::State& state) {
    const CodeGraph g = random_system(1);
    const auto queries = golden_queries();
    const auto& q = queries.at(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(execute_query(g, q.text));
    state.SetLabel(q.text);
}
BENCHMARK(BM_QueryGolden)->DenseRange(0, 19);

void BM_SnapshotSerialize(benchmark::State& state) {
    const CodeGraph g = build_orders_mock();
    for (auto _ : state) benchmark::DoNotOptimize(serialize_snapshot(g));
}
BENCHMARK(BM_SnapshotSerialize);

void BM_SnapshotParse(benchmark::State& state) {
    const auto bytes = serialize_snapshot(build_orders_mock());
    for (auto _ : state) benchmark::DoNotOptimize(parse_snapshot(bytes));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_SnapshotParse);

void BM_RandomEdges(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(random_edge_trial(7, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_RandomEdges)->Arg(1000)->Arg(10000);

} // namespace

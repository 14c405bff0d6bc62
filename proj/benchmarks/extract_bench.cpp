#include "support.hpp"

#include <codegraph/enrich/enricher.hpp>
#include <codegraph/enrich/provider.hpp>
#include <codegraph/extract/builder.hpp>

#include <benchmark/benchmark.h>

using namespace cgtest;

namespace {

void BM_StructuralOrders(benchmark::State& state) {
    const auto specs = orders_config().repos;
    for (auto _ : state) benchmark::DoNotOptimize(extract::build_structural_graph(specs, "orders-system"));
}
BENCHMARK(BM_StructuralOrders)->Unit(benchmark::kMillisecond);

void BM_MockEnrichOrders(benchmark::State& state) {
    const auto base = extract::build_structural_graph(orders_config().repos, "orders-system").graph;
    enrich::MockProvider mock;
    for (auto _ : state) {
        CodeGraph g = base;
        benchmark::DoNotOptimize(enrich::enrich_graph(g, mock));
    }
}
BENCHMARK(BM_MockEnrichOrders)->Unit(benchmark::kMillisecond);

} // namespace

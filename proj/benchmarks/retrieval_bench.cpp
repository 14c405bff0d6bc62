#include "oracles.hpp"
#include "support.hpp"

#include <codegraph/agent/tools.hpp>
#include <codegraph/enrich/provider.hpp>
#include <codegraph/index.hpp>

#include <benchmark/benchmark.h>

using namespace cgtest;

namespace {

void BM_Search(benchmark::State& state) {
    std::mt19937 rng(42);
    CodeGraph g = random_described_graph(rng);
    enrich::MockProvider mock;
    index::embed_all(g, mock);
    const index::SemanticIndex idx(g, mock);
    for (auto _ : state) benchmark::DoNotOptimize(idx.search("order payment worker", NodeKind::Code, 5, 0.0));
}
BENCHMARK(BM_Search);

void BM_MockEmbed(benchmark::State& state) {
    const std::string text = "Summary of OrderProcessor: order processor class in orders-manager.";
    for (auto _ : state) benchmark::DoNotOptimize(enrich::mock_embed(text));
}
BENCHMARK(BM_MockEmbed);

struct Orders {
    CodeGraph graph = build_orders_mock();
    enrich::MockProvider mock;
    index::SemanticIndex index{graph, mock};
    agent::Toolbox tools{graph, index};
};

void BM_EntitiesTool(benchmark::State& state) {
    static Orders o;
    for (auto _ : state) benchmark::DoNotOptimize(o.tools.entities("order"));
}
BENCHMARK(BM_EntitiesTool);

void BM_ProjectsTool(benchmark::State& state) {
    static Orders o;
    for (auto _ : state) benchmark::DoNotOptimize(o.tools.projects("orders-api structure"));
}
BENCHMARK(BM_ProjectsTool);

} // namespace

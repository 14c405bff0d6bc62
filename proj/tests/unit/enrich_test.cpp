#include <codegraph/enrich/enricher.hpp>
#include <codegraph/enrich/prompts.hpp>
#include <codegraph/enrich/provider.hpp>
#include <codegraph/enrich/transcript.hpp>
#include <codegraph/extract/builder.hpp>
#include <codegraph/snapshot.hpp>
#include <codegraph/util/text.hpp>

#include "support.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

using namespace codegraph;
using namespace codegraph::enrich;

namespace {

CodeGraph orders_structural() {
    return extract::build_structural_graph(cgtest::orders_config().repos, "orders-system").graph;
}

const NodeId kController("com.acme.orders.api.OrderController");
const NodeId kDto("com.acme.orders.api.OrderDTO");
const NodeId kModel("com.acme.orders.model.OrderModel");
const NodeId kProcessor("com.acme.orders.manager.OrderProcessor");

// Wraps the mock provider and fails every prompt containing `needle`.
class FlakyProvider : public MockProvider {
public:
    FlakyProvider(std::string needle, int failures) : needle_(std::move(needle)), failures_(failures) {}

    std::string complete(std::string_view prompt, Tier tier) override {
        if (prompt.find(needle_) != std::string_view::npos) {
            ++calls_;
            if (failures_ < 0 || calls_ <= failures_) throw Error(ErrorCode::ProviderFailure, "upstream 503");
        }
        return MockProvider::complete(prompt, tier);
    }

    int calls() const { return calls_; }

private:
    std::string needle_;
    int failures_;
    std::atomic<int> calls_{0};
};

std::uint32_t fnv(std::string_view s) {
    std::uint32_t h = 2166136261u;
    for (unsigned char c : s) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

} // namespace

TEST(MockEmbed, HandComputedBuckets) {
    // fnv1a32("order") = 0x732c1097 -> bucket 151; "processor" = 0xb0974cc7 -> 199.
    EXPECT_EQ(fnv("order") % 256, 151u);
    EXPECT_EQ(fnv("processor") % 256, 199u);

    const auto one = mock_embed("Order order ORDER");
    ASSERT_EQ(one.size(), 256u);
    for (std::size_t i = 0; i < one.size(); ++i) EXPECT_FLOAT_EQ(one[i], i == 151 ? 1.0f : 0.0f);
    EXPECT_EQ(mock_embed("order"), one);

    const auto two = mock_embed("order-processor!");
    const float r = static_cast<float>(1.0 / std::sqrt(2.0));
    EXPECT_FLOAT_EQ(two[151], r);
    EXPECT_FLOAT_EQ(two[199], r);
    EXPECT_NEAR(cosine(one, two), 1.0 / std::sqrt(2.0), 1e-6);

    // Two occurrences weigh twice: (2, 1) / sqrt(5).
    const auto weighted = mock_embed("order order processor");
    EXPECT_NEAR(weighted[151], 2.0 / std::sqrt(5.0), 1e-6);
    EXPECT_NEAR(weighted[199], 1.0 / std::sqrt(5.0), 1e-6);
}

TEST(MockEmbed, TokenFreeTextIsZero) {
    for (const char* t : {"", "   ", "!!! ---"}) {
        const auto v = mock_embed(t);
        for (float x : v) EXPECT_EQ(x, 0.0f);
    }
    EXPECT_EQ(cosine(mock_embed(""), mock_embed("order")), 0.0);
}

TEST(MockEmbed, UnitNormOnRandomText) {
    const char* samples[] = {"Summary of OrderProcessor: order processor class in orders-manager.",
                             "Project orders-api groups 2 code units", "a b c d e f g h i j k"};
    for (const char* s : samples) {
        double sq = 0;
        for (float x : mock_embed(s)) sq += static_cast<double>(x) * x;
        EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-6);
    }
}

TEST(MockProvider, DescribeCodeTemplate) {
    CodeGraph g = orders_structural();
    MockProvider mock;
    const auto text = describe_code(g, kProcessor, mock);
    EXPECT_EQ(text, "Summary of OrderProcessor: order processor class in orders-manager.");
    EXPECT_EQ(g.node(kProcessor).description, text);
    CodeGraph again = orders_structural();
    EXPECT_EQ(describe_code(again, kProcessor, mock), text);
}

TEST(Describe, EmptyInputsShortCircuit) {
    CodeGraph g("s");
    Node sys{NodeId("system:s"), NodeKind::System, "s", {}, {}, {}};
    Node proj{NodeId("project:p"), NodeKind::Project, "p", {}, {}, {}};
    Node code{NodeId("x.Empty"), NodeKind::Code, "Empty", {}, {}, {{"file", "E.java"}, {"span", "1-1"}, {"source", "  \n"}}};
    g.add_node(sys);
    g.add_node(proj);
    g.add_node(code);
    ScriptedProvider never({});
    EXPECT_EQ(describe_code(g, code.id, never), "Empty code unit.");
    EXPECT_EQ(describe_project(g, proj.id, never), "Empty project.");
    EXPECT_TRUE(never.prompts().empty());
}

TEST(Describe, ProjectPromptListsChildrenSorted) {
    CodeGraph g("s");
    g.add_node({NodeId("system:s"), NodeKind::System, "s", {}, {}, {}});
    g.add_node({NodeId("project:p"), NodeKind::Project, "p", {}, {}, {}});
    g.add_edge({NodeId("system:s"), "CONTAINS", NodeId("project:p"), {}});
    for (const char* id : {"p.Zeta", "p.Alpha", "p.Mid"}) {
        g.add_node({NodeId(id), NodeKind::Code, std::string(id).substr(2), std::string("desc of ") + id, {},
                    {{"file", "f"}, {"span", "1-1"}}});
        g.add_edge({NodeId("project:p"), "CONTAINS", NodeId(id), {}});
    }
    const auto prompt = build_project_prompt(g, NodeId("project:p"), PromptLibrary::defaults());
    const auto a = prompt.find("UNIT p.Alpha | Alpha | desc of p.Alpha");
    const auto m = prompt.find("UNIT p.Mid | Mid | desc of p.Mid");
    const auto z = prompt.find("UNIT p.Zeta | Zeta | desc of p.Zeta");
    ASSERT_NE(a, std::string::npos);
    ASSERT_NE(m, std::string::npos);
    ASSERT_NE(z, std::string::npos);
    EXPECT_LT(a, m);
    EXPECT_LT(m, z);

    MockProvider mock;
    EXPECT_EQ(describe_project(g, NodeId("project:p"), mock), "Project p groups 3 code units: Alpha, Mid, Zeta.");
}

TEST(Describe, PromptHashesStableAcrossBuilds) {
    CodeGraph a = orders_structural();
    CodeGraph b = orders_structural();
    MockProvider mock;
    enrich_graph(a, mock);
    enrich_graph(b, mock);
    for (const auto& p : a.nodes_of_kind(NodeKind::Project)) {
        EXPECT_EQ(util::hash_hex(build_project_prompt(a, p, PromptLibrary::defaults())),
                  util::hash_hex(build_project_prompt(b, p, PromptLibrary::defaults())));
    }
    EXPECT_EQ(a.meta().at("template_hash.describe_code"), PromptLibrary::defaults().get("describe_code").hash());
}

TEST(Describe, SystemPromptEmbedsEveryProjectDescription) {
    CodeGraph g = orders_structural();
    MockProvider mock;
    for (const auto& p : g.nodes_of_kind(NodeKind::Project)) describe_project(g, p, mock);
    const auto prompt = build_system_prompt(g, PromptLibrary::defaults());
    for (const auto& p : g.nodes_of_kind(NodeKind::Project)) {
        EXPECT_NE(prompt.find(*g.node(p).description), std::string::npos) << p;
    }
    ScriptedProvider once({"The order platform."});
    EXPECT_EQ(describe_system(g, once), "The order platform.");
    EXPECT_EQ(once.prompts().size(), 1u);
}

TEST(Describe, FailureMarksNodeDegraded) {
    CodeGraph g = orders_structural();
    FlakyProvider flaky("Unit: OrderModel", -1);
    const auto report = enrich_graph(g, flaky);
    EXPECT_EQ(flaky.calls(), 3);
    EXPECT_EQ(report.degraded, 1u);
    EXPECT_NE(g.node(kModel).attr("degraded"), nullptr);
    EXPECT_FALSE(g.node(kModel).description.has_value());
    EXPECT_TRUE(g.node(kProcessor).description.has_value());
    EXPECT_NO_THROW(g.validate());
}

TEST(Describe, TransientFailureIsRetried) {
    CodeGraph g = orders_structural();
    FlakyProvider flaky("Unit: OrderModel", 2);
    describe_code(g, kModel, flaky);
    EXPECT_EQ(flaky.calls(), 3);
    EXPECT_EQ(g.node(kModel).attr("degraded"), nullptr);
    EXPECT_EQ(g.node(kModel).description, "Summary of OrderModel: order model class in orders-models.");
}

TEST(Extraction, NormalizeNames) {
    EXPECT_EQ(normalize_entity_name("  orders "), "Order");
    EXPECT_EQ(normalize_entity_name("purchase   orders"), "Purchase Order");
    EXPECT_EQ(normalize_entity_name("status"), "Status");
    EXPECT_EQ(normalize_entity_name("address"), "Address");
    EXPECT_EQ(normalize_entity_name("Invoice"), "Invoice");
    EXPECT_EQ(normalize_entity_name("   "), "");
}

TEST(Extraction, InvalidVerbsAndUnknownUidsDropped) {
    const CodeGraph g = orders_structural();
    const std::string reply = R"(Here you go: {"entities":[{"name":"orders","description":"An order.",
        "operations":[{"codeUid":"com.acme.orders.api.OrderController","verb":"depends_on"},
                      {"codeUid":"com.acme.orders.api.OrderController","verb":"DEPENDS_ON"},
                      {"codeUid":"com.acme.Nope","verb":"CREATE"},
                      {"codeUid":"com.acme.orders.manager.OrderProcessor","verb":"PROCESS"}],
        "representedBy":["com.acme.orders.model.OrderModel","project:orders-api"]}]} thanks)";
    const auto r = parse_extraction(reply, g);
    ASSERT_EQ(r.entities.size(), 1u);
    const auto& e = r.entities[0];
    EXPECT_EQ(e.name, "Order");
    EXPECT_EQ(e.operations, (std::vector<EntityOperation>{{kProcessor.str(), "PROCESS"}}));
    EXPECT_EQ(e.represented_by, std::vector<std::string>{kModel.str()});
    EXPECT_EQ(r.diagnostics.size(), 4u);

    for (const char* bad : {"no json here", "{\"entities\": 3}", "[1,2]", "{\"items\": []}"}) {
        try {
            parse_extraction(bad, g);
            ADD_FAILURE() << bad;
        } catch (const Error& ex) {
            EXPECT_EQ(ex.code(), ErrorCode::MalformedExtraction);
        }
    }
}

TEST(Extraction, MockFixtureBatches) {
    CodeGraph g = orders_structural();
    MockProvider mock;
    std::vector<ProjectExtraction> all;
    for (const auto& p : g.nodes_of_kind(NodeKind::Project)) all.push_back({p, extract_entities(g, p, mock)});
    const auto merged = merge_entities(all);
    ASSERT_EQ(merged.size(), 1u);
    EXPECT_EQ(merged[0].name, "Order");
    EXPECT_EQ(merged[0].operations,
              (std::vector<EntityOperation>{{kController.str(), "CREATE"}, {kProcessor.str(), "PROCESS"}}));
    EXPECT_EQ(merged[0].represented_by, (std::vector<std::string>{kDto.str(), kModel.str()}));
}

TEST(Extraction, RepairThenSucceed) {
    const CodeGraph g = orders_structural();
    ScriptedProvider script({"not json at all", "{\"entities\": {}}",
                             R"({"entities":[{"name":"Order","operations":[{"codeUid":"com.acme.orders.api.OrderController","verb":"CREATE"}]}]})"});
    const auto r = extract_entities(g, NodeId("project:orders-api"), script);
    ASSERT_EQ(r.entities.size(), 1u);
    const auto prompts = script.prompts();
    ASSERT_EQ(prompts.size(), 3u);
    EXPECT_EQ(prompt_kind(prompts[0]), "extract_entities");
    EXPECT_EQ(prompt_kind(prompts[1]), "extract_entities_repair");
    EXPECT_NE(prompts[1].find("not json at all"), std::string::npos);
    EXPECT_NE(prompts[1].find(prompts[0].substr(prompts[0].find('\n') + 1)), std::string::npos);
    EXPECT_EQ(r.diagnostics.size(), 2u);
}

TEST(Extraction, GivesUpAfterTwoRepairs) {
    const CodeGraph g = orders_structural();
    ScriptedProvider script({}, std::string("still not json"));
    const auto r = extract_entities(g, NodeId("project:orders-api"), script);
    EXPECT_TRUE(r.entities.empty());
    EXPECT_FALSE(r.diagnostics.empty());
    EXPECT_EQ(script.prompts().size(), 3u);
}

TEST(Merge, HandMerge) {
    ExtractedEntity a{"Order", "Placed by customers.", {{"x.Controller", "CREATE"}}, {"x.Dto"}};
    ExtractedEntity b{"orders", "Placed by customers.", {{"y.Processor", "PROCESS"}, {"x.Controller", "CREATE"}}, {}};
    ExtractedEntity c{"Invoice", "Billing.", {}, {"z.Invoice"}};
    ExtractedEntity d{"Order", "Tracked through states.", {}, {"x.Dto"}};
    const auto merged = merge_entities({{NodeId("project:b"), {{b, c}, {}}}, {NodeId("project:a"), {{a, d}, {}}}});
    ASSERT_EQ(merged.size(), 2u);
    EXPECT_EQ(merged[0], (ExtractedEntity{"Invoice", "Billing.", {}, {"z.Invoice"}}));
    EXPECT_EQ(merged[1], (ExtractedEntity{"Order", "Placed by customers.\nTracked through states.",
                                          {{"x.Controller", "CREATE"}, {"y.Processor", "PROCESS"}}, {"x.Dto"}}));
    EXPECT_EQ(merge_entities({{NodeId("project:a"), {{a}, {}}}, {NodeId("project:b"), {{c}, {}}}}).size(), 2u);
}

TEST(SemanticLayer, RelatesToAllProjectsAndIdempotent) {
    CodeGraph g = orders_structural();
    const ExtractedEntity order{"Order", "Domain entity Order.",
                                {{kController.str(), "CREATE"}, {kProcessor.str(), "PROCESS"}},
                                {kDto.str(), kModel.str()}};
    apply_semantic_layer(g, {order});
    // OrderController/OrderDTO live in orders-api, OrderModel in orders-models,
    // OrderProcessor in orders-manager.
    for (const char* p : {"project:orders-api", "project:orders-models", "project:orders-manager"}) {
        EXPECT_TRUE(g.has_edge(NodeId("entity:Order"), "RELATES_TO", NodeId(p))) << p;
    }
    EXPECT_TRUE(check_relates_to(g).empty());
    const auto before = serialize_snapshot(g);
    apply_semantic_layer(g, {order});
    EXPECT_EQ(serialize_snapshot(g), before);
}

TEST(SemanticLayer, SingleProjectEntity) {
    CodeGraph g = orders_structural();
    apply_semantic_layer(g, {ExtractedEntity{"Shipment", "Goods on the move.", {{kProcessor.str(), "SHIP"}}, {}}});
    std::size_t relates = 0;
    for (const auto* e : g.out_edges(NodeId("entity:Shipment"))) relates += e->label == "RELATES_TO";
    EXPECT_EQ(relates, 1u);
    EXPECT_TRUE(g.has_edge(NodeId("entity:Shipment"), "RELATES_TO", NodeId("project:orders-manager")));
}

TEST(SemanticLayer, CheckerFindsBreaches) {
    CodeGraph g = orders_structural();
    apply_semantic_layer(g, {ExtractedEntity{"Shipment", "x", {{kProcessor.str(), "SHIP"}}, {}}});
    g.add_edge({NodeId("entity:Shipment"), "RELATES_TO", NodeId("project:orders-api"), {}});
    EXPECT_EQ(check_relates_to(g).size(), 1u);
    g.add_edge({kModel, "STORE", NodeId("entity:Shipment"), {}});
    EXPECT_EQ(check_relates_to(g).size(), 2u);
}

TEST(Enrich, MockFixtureSemanticLayer) {
    CodeGraph g = orders_structural();
    MockProvider mock;
    std::vector<EnrichStage> stages;
    const auto report = enrich_graph(g, mock, {}, [&](EnrichStage s) { stages.push_back(s); });
    EXPECT_EQ(stages, (std::vector<EnrichStage>{EnrichStage::Describing, EnrichStage::Entities}));
    EXPECT_EQ(report.degraded, 0u);
    EXPECT_EQ(report.entities, 1u);
    const NodeId order("entity:Order");
    ASSERT_TRUE(g.contains(order));
    std::size_t verbs = 0, represents = 0;
    for (const auto* e : g.in_edges(order)) {
        if (e->label == "REPRESENTS") ++represents;
        else if (!is_reserved_label(e->label)) ++verbs;
    }
    EXPECT_GE(verbs, 2u);
    EXPECT_GE(represents, 1u);
    EXPECT_TRUE(check_relates_to(g).empty());
    for (const auto& e : g.edges()) {
        if (g.node(e.src).kind == NodeKind::Code && g.node(e.dst).kind == NodeKind::Entity) {
            EXPECT_TRUE(e.label == "REPRESENTS" || !is_reserved_label(e.label));
        }
    }
    for (const auto& [id, n] : g.nodes()) EXPECT_TRUE(n.description && !n.description->empty()) << id;
    EXPECT_NO_THROW(g.validate());
}

TEST(Enrich, MockBuildsAreIdentical) {
    CodeGraph a = orders_structural();
    CodeGraph b = orders_structural();
    MockProvider mock;
    EnrichOptions serial;
    serial.parallelism = 1;
    enrich_graph(a, mock);
    enrich_graph(b, mock, serial);
    EXPECT_EQ(serialize_snapshot(a), serialize_snapshot(b));
}

TEST(RecordReplay, RecordOnceReplayTwice) {
    auto transcript = std::make_shared<Transcript>();
    auto recorder = std::make_shared<RecordingProvider>(std::make_shared<MockProvider>(), transcript);
    CodeGraph recorded = orders_structural();
    enrich_graph(recorded, *recorder);

    std::vector<std::string> snapshots;
    for (int run = 0; run < 2; ++run) {
        ReplayProvider replay(transcript, "mock/256", 256);
        CodeGraph g = orders_structural();
        enrich_graph(g, replay);
        snapshots.push_back(serialize_snapshot(g));
    }
    EXPECT_EQ(snapshots[0], snapshots[1]);
    EXPECT_EQ(snapshots[0], serialize_snapshot(recorded));
}

TEST(RecordReplay, HierarchyOrderingInTranscript) {
    auto transcript = std::make_shared<Transcript>();
    RecordingProvider recorder(std::make_shared<MockProvider>(), transcript);
    CodeGraph g = orders_structural();
    enrich_graph(g, recorder);

    const auto records = transcript->records();
    std::ptrdiff_t last_code = -1, first_project = -1, last_project = -1, system = -1, first_entities = -1;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto kind = prompt_kind(records[i].prompt);
        const auto idx = static_cast<std::ptrdiff_t>(i);
        if (kind == "describe_code") {
            last_code = idx;
            EXPECT_EQ(records[i].tier, "fast");
        } else if (kind == "describe_project") {
            if (first_project < 0) first_project = idx;
            last_project = idx;
            EXPECT_EQ(records[i].tier, "deep");
        } else if (kind == "describe_system") {
            system = idx;
        } else if (kind == "extract_entities" && first_entities < 0) {
            first_entities = idx;
        }
    }
    ASSERT_GE(last_code, 0);
    EXPECT_LT(last_code, first_project);
    EXPECT_LT(last_project, system);
    EXPECT_LT(system, first_entities);
}

TEST(RecordReplay, TranscriptFileRoundTrip) {
    cgtest::TempDir dir;
    const auto path = dir / "t.jsonl";
    {
        auto transcript = std::make_shared<Transcript>(path);
        RecordingProvider recorder(std::make_shared<MockProvider>(), transcript);
        recorder.complete("[task:describe_code]\nUnit: A", Tier::Fast);
        recorder.embed("order");
    }
    const auto loaded = Transcript::load(path);
    ASSERT_EQ(loaded->size(), 2u);
    EXPECT_EQ(loaded->embedding_info(), (std::pair<std::string, std::size_t>{"mock/256", 256}));
    ReplayProvider replay(loaded, "mock/256", 256);
    EXPECT_EQ(replay.complete("[task:describe_code]\nUnit: A", Tier::Fast), "Summary of A: a  in .");
    EXPECT_EQ(replay.embed("order"), mock_embed("order"));
}

TEST(RecordReplay, MissesAreStrict) {
    auto transcript = std::make_shared<Transcript>();
    RecordingProvider recorder(std::make_shared<MockProvider>(), transcript);
    recorder.complete("[task:x]\nhello", Tier::Fast);
    ReplayProvider replay(transcript, "mock/256", 256);
    EXPECT_NO_THROW(replay.complete("[task:x]\nhello", Tier::Fast));
    auto expect_miss = [&](auto&& fn) {
        try {
            fn();
            ADD_FAILURE();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ReplayMiss);
        }
    };
    expect_miss([&] { replay.complete("[task:x]\nhello", Tier::Fast); });
    expect_miss([&] { replay.complete("[task:x]\nhello", Tier::Deep); });
    expect_miss([&] { replay.complete("[task:x]\nother", Tier::Fast); });
    expect_miss([&] { replay.embed("never embedded"); });

    ReplayProvider empty(std::make_shared<Transcript>(), "mock/256", 256);
    CodeGraph g = orders_structural();
    expect_miss([&] { enrich_graph(g, empty); });
}

TEST(Prompts, RenderAndOverride) {
    EXPECT_EQ(render("a {{x}} b {{y}} {{x}}", {{"x", "1"}}), "a 1 b {{y}} 1");
    const auto lib = PromptLibrary::defaults();
    for (const char* name : {"describe_code", "describe_project", "describe_system", "extract_entities",
                             "extract_entities_repair", "agent", "agent_final"}) {
        const auto& t = lib.get(name);
        EXPECT_EQ(prompt_kind(t.text), name);
        EXPECT_EQ(t.hash().size(), 16u);
    }
    EXPECT_THROW(lib.get("nope"), Error);

    cgtest::TempDir dir;
    cgtest::write_file(dir / "describe_code.txt", "[task:describe_code]\nUnit: {{name}}\nCustom.\n");
    cgtest::write_file(dir / "unrelated.txt", "ignored");
    const auto custom = PromptLibrary::from_directory(dir.path());
    EXPECT_EQ(custom.get("describe_code").text, "[task:describe_code]\nUnit: {{name}}\nCustom.\n");
    EXPECT_EQ(custom.get("agent").text, lib.get("agent").text);
    EXPECT_NE(custom.get("describe_code").hash(), lib.get("describe_code").hash());
    EXPECT_THROW(PromptLibrary::from_directory(dir / "missing"), Error);
}

TEST(Retry, OnlyProviderFailuresAreRetried) {
    int calls = 0;
    EXPECT_THROW(with_retries(RetryPolicy{}, [&]() -> int {
                     ++calls;
                     throw Error(ErrorCode::ReplayMiss, "miss");
                 }),
                 Error);
    EXPECT_EQ(calls, 1);
    calls = 0;
    EXPECT_EQ(with_retries(RetryPolicy{}, [&] {
                  if (++calls < 3) throw Error(ErrorCode::ProviderFailure, "x");
                  return 7;
              }),
              7);
    EXPECT_EQ(calls, 3);
}

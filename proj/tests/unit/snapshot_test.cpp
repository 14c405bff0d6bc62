#include <codegraph/snapshot.hpp>

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>

using namespace codegraph;

namespace {

std::uint32_t bitwise_crc32(std::string_view data) {
    std::uint32_t crc = 0xFFFFFFFFu;
    for (unsigned char byte : data) {
        crc ^= byte;
        for (int k = 0; k < 8; ++k) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
    }
    return ~crc;
}

CodeGraph sample_graph() {
    CodeGraph g("shop \"main\"");
    g.meta()["schema"] = "1";
    Node sys;
    sys.id = NodeId("system:shop");
    sys.kind = NodeKind::System;
    sys.name = "shop";
    sys.description = "Line one.\nLine two with \t tab and ünïcode.";
    g.add_node(sys);
    Node p;
    p.id = NodeId("project:api");
    p.kind = NodeKind::Project;
    p.name = "api";
    p.attrs["url"] = "https://example.invalid/api.git";
    g.add_node(p);
    Node c;
    c.id = NodeId("com.shop.Api");
    c.kind = NodeKind::Code;
    c.name = "Api";
    c.attrs = {{"file", "src/Api.java"}, {"span", "3-40"}, {"source", "class Api {\n  int x;\n}\n"}};
    c.embedding = Embedding{0.6f, 0.0f, -0.8f};
    g.add_node(c);
    Node e;
    e.id = NodeId("entity:Cart");
    e.kind = NodeKind::Entity;
    e.name = "Cart";
    e.description = "";
    g.add_node(e);
    g.add_edge({sys.id, "CONTAINS", p.id, {}});
    g.add_edge({p.id, "CONTAINS", c.id, {}});
    g.add_edge({c.id, "CREATE", e.id, {{"note", "x y"}}});
    g.add_edge({e.id, "RELATES_TO", p.id, {}});
    return g;
}

std::string with_trailer(std::string body) {
    char crc[16];
    std::snprintf(crc, sizeof crc, "%08x", bitwise_crc32(body));
    return body + "C " + crc + "\n";
}

} // namespace

TEST(Snapshot, RoundTripPreservesEverything) {
    const CodeGraph g = sample_graph();
    const std::string bytes = serialize_snapshot(g);
    const CodeGraph back = parse_snapshot(bytes);
    EXPECT_EQ(back.system_name(), g.system_name());
    EXPECT_EQ(back.meta(), g.meta());
    EXPECT_EQ(back.nodes(), g.nodes());
    EXPECT_EQ(back.sorted_edges(), g.sorted_edges());
    EXPECT_EQ(serialize_snapshot(back), bytes);
    EXPECT_EQ(back.node(NodeId("entity:Cart")).description, std::optional<std::string>(""));
    EXPECT_FALSE(back.node(NodeId("project:api")).description.has_value());
}

TEST(Snapshot, TrailerIsCrc32OfBody) {
    const std::string bytes = serialize_snapshot(sample_graph());
    const std::size_t cut = bytes.rfind("C ");
    ASSERT_NE(cut, std::string::npos);
    EXPECT_EQ(with_trailer(bytes.substr(0, cut)), bytes);
}

TEST(Snapshot, InsertionOrderDoesNotChangeBytes) {
    CodeGraph a = sample_graph();
    CodeGraph b("shop \"main\"");
    b.meta() = a.meta();
    std::vector<Node> nodes;
    for (const auto& [id, n] : a.nodes()) nodes.push_back(n);
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) b.add_node(*it);
    auto edges = a.sorted_edges();
    for (auto it = edges.rbegin(); it != edges.rend(); ++it) b.add_edge(*it);
    EXPECT_EQ(serialize_snapshot(a), serialize_snapshot(b));
}

TEST(Snapshot, EveryFlippedByteIsRejected) {
    const std::string bytes = serialize_snapshot(sample_graph());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        std::string broken = bytes;
        broken[i] = static_cast<char>(broken[i] ^ 0x01);
        try {
            parse_snapshot(broken);
            ADD_FAILURE() << "accepted corruption at byte " << i;
        } catch (const Error& e) {
            EXPECT_TRUE(e.code() == ErrorCode::CorruptSnapshot || e.code() == ErrorCode::VersionMismatch)
                << i;
        }
    }
    EXPECT_THROW(parse_snapshot(bytes.substr(0, bytes.size() / 2)), Error);
    EXPECT_THROW(parse_snapshot(""), Error);
}

TEST(Snapshot, VersionMismatch) {
    std::string bytes = serialize_snapshot(sample_graph());
    bytes.replace(bytes.find(" 1 "), 3, " 9 ");
    try {
        parse_snapshot(bytes);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::VersionMismatch);
    }
}

TEST(Snapshot, ValidChecksumButInconsistentBody) {
    const std::string body = "CLGS 1 \"s\"\nM {}\nE \"a\" CALLS \"b\" {}\n";
    try {
        parse_snapshot(with_trailer(body));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CorruptSnapshot);
    }
    const std::string bad_tag = "CLGS 1 \"s\"\nM {}\nQ nothing\n";
    EXPECT_THROW(parse_snapshot(with_trailer(bad_tag)), Error);
}

TEST(Snapshot, FileRoundTrip) {
    cgtest::TempDir dir;
    const auto path = dir / "nested/g.clgs";
    save_snapshot(sample_graph(), path);
    EXPECT_EQ(serialize_snapshot(load_snapshot(path)), serialize_snapshot(sample_graph()));
    try {
        load_snapshot(dir / "missing.clgs");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoFailure);
    }
}

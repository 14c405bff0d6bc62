#include <codegraph/query.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <map>
#include <random>
#include <set>

using namespace codegraph;
using namespace cgtest;

TEST(QueryOracle, TwentyGoldenQueriesMatchBruteForce) {
    const auto start = std::chrono::steady_clock::now();
    const auto goldens = golden_queries();
    ASSERT_EQ(goldens.size(), 20u);
    for (std::uint32_t seed : {1u, 2u, 3u}) {
        const CodeGraph g = random_system(seed);
        ASSERT_LE(g.node_count(), 50u);
        std::size_t nonempty = 0;
        for (const auto& gq : goldens) {
            const QueryRows got = execute_query(g, gq.text);
            const QueryRows want = brute_force_query(g, gq.oracle);
            EXPECT_EQ(got, want) << gq.text << " seed " << seed;
            if ((got.count && *got.count) || !got.rows.empty()) ++nonempty;
        }
        EXPECT_GE(nonempty, 15u);
    }
    EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(10));
}

TEST(QueryOracle, RowsAreSortedAndDistinct) {
    const CodeGraph g = random_system(4);
    const auto rows = execute_query(g, "MATCH (a:Code)-[*1..3]->(b) RETURN b").rows;
    EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end()));
    EXPECT_EQ(std::adjacent_find(rows.begin(), rows.end()), rows.end());
}

TEST(QueryParse, Structure) {
    const GraphQuery q = parse_query("MATCH (a:Code {name:\"X\", language:\"java\"})-[:CALLS|DEPENDS_ON*2..5]->(b) RETURN b, a");
    EXPECT_EQ(q.source.var, "a");
    EXPECT_EQ(q.source.kind, "Code");
    ASSERT_EQ(q.source.filters.size(), 2u);
    EXPECT_EQ(q.source.filters[1].second, "java");
    ASSERT_TRUE(q.edge);
    EXPECT_EQ(q.edge->labels, (std::vector<std::string>{"CALLS", "DEPENDS_ON"}));
    EXPECT_EQ(q.edge->min_hops, 2);
    EXPECT_EQ(q.edge->max_hops, 5);
    EXPECT_EQ(q.returns, (std::vector<std::string>{"b", "a"}));
    EXPECT_FALSE(q.count);
}

TEST(QueryParse, ErrorsCarryPositionAndExpected) {
    try {
        parse_query("MATCH (a:Code RETURN a");
        FAIL();
    } catch (const QueryParseError& e) {
        EXPECT_EQ(e.position(), 14u);
        EXPECT_EQ(e.expected(), std::vector<std::string>{"')'"});
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
    }
    try {
        parse_query("MATCH (a) RETURN b");
        FAIL();
    } catch (const QueryParseError& e) {
        EXPECT_EQ(e.position(), 17u);
        EXPECT_EQ(e.expected(), std::vector<std::string>{"a"});
    }
    try {
        parse_query("FIND (a) RETURN a");
        FAIL();
    } catch (const QueryParseError& e) {
        EXPECT_EQ(e.position(), 0u);
    }
    try {
        parse_query("MATCH (a) RETURN a extra");
        FAIL();
    } catch (const QueryParseError& e) {
        EXPECT_EQ(e.position(), 19u);
    }
    try {
        parse_query("MATCH (a {name:\"x)");
        FAIL();
    } catch (const QueryParseError& e) {
        EXPECT_EQ(e.position(), 15u);
    }
}

TEST(QueryParse, HopBounds) {
    EXPECT_NO_THROW(parse_query("MATCH (a)-[*1..8]->(b) RETURN a"));
    EXPECT_NO_THROW(parse_query("MATCH (a)-[*3..3]->(b) RETURN a"));
    for (const char* bad : {"MATCH (a)-[*0..2]->(b) RETURN a", "MATCH (a)-[*1..9]->(b) RETURN a",
                            "MATCH (a)-[*3..2]->(b) RETURN a", "MATCH (a)-[*1]->(b) RETURN a",
                            "MATCH (a)-[*99999999..2]->(b) RETURN a"}) {
        EXPECT_THROW(parse_query(bad), QueryParseError) << bad;
    }
}

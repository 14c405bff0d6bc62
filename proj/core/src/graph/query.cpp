#include <codegraph/query.hpp>

#include <codegraph/util/text.hpp>

#include <cctype>
#include <set>

namespace codegraph {

namespace {

std::string describe_expected(const std::vector<std::string>& expected) {
    std::string out;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) out += i + 1 == expected.size() ? " or " : ", ";
        out += expected[i];
    }
    return out;
}

enum class Tok { Ident, String, Int, Punct, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t pos;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            if (i_ >= src_.size()) {
                out.push_back({Tok::End, "", i_});
                return out;
            }
            const std::size_t start = i_;
            const char c = src_[i_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                while (i_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) {
                    ++i_;
                }
                out.push_back({Tok::Ident, std::string(src_.substr(start, i_ - start)), start});
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
                out.push_back({Tok::Int, std::string(src_.substr(start, i_ - start)), start});
            } else if (c == '"') {
                out.push_back({Tok::String, read_string(), start});
            } else if (c == '-') {
                expect_literal("-[", start);
                out.push_back({Tok::Punct, "-[", start});
            } else if (c == ']') {
                expect_literal("]->", start);
                out.push_back({Tok::Punct, "]->", start});
            } else if (c == '.') {
                expect_literal("..", start);
                out.push_back({Tok::Punct, "..", start});
            } else if (std::string_view("(){}:,|*").find(c) != std::string_view::npos) {
                ++i_;
                out.push_back({Tok::Punct, std::string(1, c), start});
            } else {
                throw QueryParseError(start, {"token"}, "unexpected character '" + std::string(1, c) + "'");
            }
        }
    }

private:
    void skip_space() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    }

    void expect_literal(std::string_view lit, std::size_t start) {
        if (src_.substr(i_, lit.size()) != lit) {
            throw QueryParseError(start, {"\"" + std::string(lit) + "\""}, "malformed punctuation");
        }
        i_ += lit.size();
    }

    std::string read_string() {
        const std::size_t start = i_;
        ++i_;
        std::string out;
        while (i_ < src_.size()) {
            const char c = src_[i_++];
            if (c == '"') return out;
            if (c == '\\') {
                if (i_ >= src_.size()) break;
                const char e = src_[i_++];
                switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                default: out += e; break;
                }
                continue;
            }
            out += c;
        }
        throw QueryParseError(start, {"closing '\"'"}, "unterminated string");
    }

    std::string_view src_;
    std::size_t i_ = 0;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    GraphQuery run() {
        GraphQuery q;
        keyword("MATCH");
        q.source = node_pattern();
        if (peek_punct("-[")) {
            q.edge = edge_pattern();
            q.target = node_pattern();
        }
        keyword("RETURN");
        if (peek().kind == Tok::Ident && peek().text == "COUNT") {
            next();
            q.count = true;
        } else {
            for (;;) {
                const Token& t = expect_ident("variable");
                const bool known = t.text == q.source.var || (q.target && t.text == q.target->var);
                if (!known) {
                    std::vector<std::string> vars{q.source.var};
                    if (q.target && q.target->var != q.source.var) vars.push_back(q.target->var);
                    throw QueryParseError(t.pos, vars, "unknown variable '" + t.text + "'");
                }
                q.returns.push_back(t.text);
                if (!peek_punct(",")) break;
                next();
            }
        }
        if (peek().kind != Tok::End) fail({"end of query"});
        return q;
    }

private:
    const Token& peek() const { return toks_[i_]; }
    const Token& next() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

    bool peek_punct(std::string_view p) const {
        return peek().kind == Tok::Punct && peek().text == p;
    }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        const Token& t = peek();
        const std::string found = t.kind == Tok::End ? "end of query" : "'" + t.text + "'";
        throw QueryParseError(t.pos, expected,
                              "expected " + describe_expected(expected) + " but found " + found);
    }

    void keyword(std::string_view kw) {
        if (peek().kind != Tok::Ident || peek().text != kw) fail({std::string(kw)});
        next();
    }

    void punct(std::string_view p) {
        if (!peek_punct(p)) fail({"'" + std::string(p) + "'"});
        next();
    }

    const Token& expect_ident(const std::string& what) {
        if (peek().kind != Tok::Ident) fail({what});
        return next();
    }

    int expect_int() {
        if (peek().kind != Tok::Int) fail({"integer"});
        const Token& t = next();
        if (t.text.size() > 6) throw QueryParseError(t.pos, {"integer in 1..8"}, "hop bound too large");
        return std::stoi(t.text);
    }

    NodePattern node_pattern() {
        NodePattern p;
        punct("(");
        p.var = expect_ident("variable").text;
        if (peek_punct(":")) {
            next();
            p.kind = expect_ident("node kind").text;
        }
        if (peek_punct("{")) {
            next();
            for (;;) {
                std::string key = expect_ident("property key").text;
                punct(":");
                if (peek().kind != Tok::String) fail({"quoted string"});
                p.filters.emplace_back(std::move(key), next().text);
                if (peek_punct(",")) {
                    next();
                    continue;
                }
                break;
            }
            punct("}");
        }
        punct(")");
        return p;
    }

    EdgePattern edge_pattern() {
        EdgePattern e;
        punct("-[");
        if (peek_punct(":")) {
            next();
            e.labels.push_back(expect_ident("edge label").text);
            while (peek_punct("|")) {
                next();
                e.labels.push_back(expect_ident("edge label").text);
            }
        }
        if (peek_punct("*")) {
            next();
            const std::size_t pos = peek().pos;
            e.min_hops = expect_int();
            punct("..");
            e.max_hops = expect_int();
            if (e.min_hops < 1 || e.min_hops > e.max_hops || e.max_hops > 8) {
                throw QueryParseError(pos, {"hop range with 1 <= lo <= hi <= 8"},
                                      "invalid hop range " + std::to_string(e.min_hops) + ".." +
                                          std::to_string(e.max_hops));
            }
        }
        punct("]->");
        return e;
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

} // namespace

QueryParseError::QueryParseError(std::size_t position, std::vector<std::string> expected,
                                 const std::string& detail)
    : Error(ErrorCode::ParseError, "parse error at position " + std::to_string(position) + ": " + detail),
      position_(position), expected_(std::move(expected)) {}

GraphQuery parse_query(std::string_view text) {
    return Parser(Lexer(text).run()).run();
}

bool node_matches(const Node& node, const NodePattern& pattern) {
    if (pattern.kind && *pattern.kind != to_string(node.kind)) return false;
    for (const auto& [key, value] : pattern.filters) {
        if (key == "name") {
            if (node.name != value) return false;
            continue;
        }
        const std::string* v = node.attr(key);
        if (!v || *v != value) return false;
    }
    return true;
}

QueryRows execute_query(const CodeGraph& graph, const GraphQuery& query) {
    std::vector<const Node*> sources;
    for (const auto& [id, n] : graph.nodes()) {
        if (node_matches(n, query.source)) sources.push_back(&n);
    }

    // Distinct full bindings: (source) or (source, target).
    std::set<std::pair<NodeId, NodeId>> bindings;
    if (!query.edge) {
        for (const Node* n : sources) bindings.emplace(n->id, NodeId{});
    } else {
        const EdgePattern& ep = *query.edge;
        const std::set<std::string> label_set(ep.labels.begin(), ep.labels.end());
        const bool same_var = query.target->var == query.source.var;
        for (const Node* a : sources) {
            std::set<NodeId> frontier{a->id};
            for (int hop = 1; hop <= ep.max_hops && !frontier.empty(); ++hop) {
                std::set<NodeId> next;
                for (const auto& id : frontier) {
                    for (const Edge* e : graph.out_edges(id)) {
                        if (label_set.empty() || label_set.count(e->label)) next.insert(e->dst);
                    }
                }
                if (hop >= ep.min_hops) {
                    for (const auto& b : next) {
                        if (same_var && b != a->id) continue;
                        if (node_matches(graph.node(b), *query.target)) bindings.emplace(a->id, b);
                    }
                }
                frontier = std::move(next);
            }
        }
    }

    QueryRows out;
    if (query.count) {
        out.columns = {"COUNT"};
        out.count = bindings.size();
        return out;
    }
    out.columns = query.returns;
    std::set<std::vector<NodeId>> rows;
    for (const auto& [a, b] : bindings) {
        std::vector<NodeId> row;
        row.reserve(query.returns.size());
        for (const auto& var : query.returns) row.push_back(var == query.source.var ? a : b);
        rows.insert(std::move(row));
    }
    out.rows.assign(rows.begin(), rows.end());
    return out;
}

QueryRows execute_query(const CodeGraph& graph, std::string_view text) {
    return execute_query(graph, parse_query(text));
}

} // namespace codegraph

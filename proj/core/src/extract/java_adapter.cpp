#include <codegraph/extract/adapter.hpp>

#include <codegraph/util/text.hpp>

#include <cctype>
#include <map>
#include <set>

// Java-subset adapter. Recognizes type declarations (class, interface, enum,
// record), their members, and the relations below. It is a token-level
// recognizer, not a full Java parser.
//
//   extends (class or interface)  -> DEPENDS_ON
//   implements                    -> IMPLEMENTS
//   import a.b.C / import static  -> DEPENDS_ON (top-level types only)
//   field type                    -> DEPENDS_ON
//   recv.m(...) / T.m(...)        -> CALLS type of recv / T
//   new T(...)                    -> CALLS T

namespace codegraph::extract {

namespace {

struct Tok {
    enum Kind { Ident, Sym, Str, Num, End } kind;
    std::string text;
    int line;
};

std::vector<Tok> lex(std::string_view src) {
    std::vector<Tok> out;
    int line = 1;
    std::size_t i = 0;
    const std::size_t n = src.size();
    auto count_lines = [&](std::size_t from, std::size_t to) {
        for (std::size_t k = from; k < to && k < n; ++k) {
            if (src[k] == '\n') ++line;
        }
    };
    while (i < n) {
        const char c = src[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
        } else if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            const std::size_t end = src.find("*/", i + 2);
            const std::size_t stop = end == std::string_view::npos ? n : end + 2;
            count_lines(i, stop);
            i = stop;
        } else if (c == '"' && src.substr(i, 3) == "\"\"\"") {
            const std::size_t end = src.find("\"\"\"", i + 3);
            const std::size_t stop = end == std::string_view::npos ? n : end + 3;
            out.push_back({Tok::Str, "", line});
            count_lines(i, stop);
            i = stop;
        } else if (c == '"' || c == '\'') {
            const int start_line = line;
            std::size_t k = i + 1;
            while (k < n && src[k] != c && src[k] != '\n') k += src[k] == '\\' ? 2 : 1;
            out.push_back({Tok::Str, "", start_line});
            i = std::min(n, k + 1);
            if (k < n && src[k] == '\n') ++line;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
                   static_cast<unsigned char>(c) >= 0x80) {
            std::size_t k = i;
            while (k < n && (std::isalnum(static_cast<unsigned char>(src[k])) || src[k] == '_' ||
                             src[k] == '$' || static_cast<unsigned char>(src[k]) >= 0x80)) {
                ++k;
            }
            out.push_back({Tok::Ident, std::string(src.substr(i, k - i)), line});
            i = k;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t k = i;
            while (k < n && (std::isalnum(static_cast<unsigned char>(src[k])) || src[k] == '.' ||
                             src[k] == '_')) {
                ++k;
            }
            out.push_back({Tok::Num, std::string(src.substr(i, k - i)), line});
            i = k;
        } else {
            out.push_back({Tok::Sym, std::string(1, c), line});
            ++i;
        }
    }
    out.push_back({Tok::End, "", line});
    return out;
}

const std::set<std::string>& modifiers() {
    static const std::set<std::string> m{"public",   "private", "protected",    "static",
                                         "final",    "abstract", "sealed",      "non",
                                         "strictfp", "transient", "volatile",   "synchronized",
                                         "native",   "default"};
    return m;
}

bool is_type_keyword(const std::string& s) {
    return s == "class" || s == "interface" || s == "enum" || s == "record";
}

bool is_capitalized(const std::string& s) {
    return !s.empty() && std::isupper(static_cast<unsigned char>(s.front()));
}

class JavaParser {
public:
    JavaParser(std::string_view path, std::string_view text, const ParseOptions& options)
        : path_(path), text_(text), toks_(lex(text)), options_(options) {}

    ParseResult run() {
        parse_header();
        while (!at_end()) {
            const std::size_t start = i_;
            skip_annotations_and_modifiers();
            if (at_end()) break;
            if (is_type_keyword(cur().text) || (is_sym("@") && peek(1).text == "interface")) {
                parse_type(start, package_, /*top_level=*/true);
            } else if (is_sym("{")) {
                skip_balanced("{", "}");
            } else {
                advance();
            }
        }
        result_.contexts[std::string(path_)] = context_;
        return std::move(result_);
    }

private:
    struct Member {
        std::map<std::string, std::string> vars; // variable -> type name
    };

    // ---- token helpers ----
    const Tok& cur() const { return toks_[i_]; }
    const Tok& peek(std::size_t k) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    bool at_end() const { return toks_[i_].kind == Tok::End; }
    void advance() {
        if (!at_end()) ++i_;
    }
    bool is_sym(std::string_view s) const { return cur().kind == Tok::Sym && cur().text == s; }
    bool is_ident(std::string_view s) const { return cur().kind == Tok::Ident && cur().text == s; }

    // Positioned on `open`; leaves i_ after the matching close. Returns the
    // index of the close token (or End).
    std::size_t skip_balanced(std::string_view open, std::string_view close) {
        int depth = 0;
        while (!at_end()) {
            if (is_sym(open)) ++depth;
            else if (is_sym(close) && --depth == 0) {
                const std::size_t at = i_;
                advance();
                return at;
            }
            advance();
        }
        return i_;
    }

    void skip_generics() {
        if (!is_sym("<")) return;
        int depth = 0;
        while (!at_end()) {
            if (is_sym("<")) ++depth;
            else if (is_sym(">") && --depth == 0) {
                advance();
                return;
            }
            else if (is_sym("{") || is_sym(";")) return; // malformed; bail out
            advance();
        }
    }

    void skip_annotations_and_modifiers() {
        for (;;) {
            if (is_sym("@") && peek(1).text != "interface") {
                advance();
                read_qualified();
                if (is_sym("(")) skip_balanced("(", ")");
            } else if (cur().kind == Tok::Ident && modifiers().count(cur().text)) {
                advance();
                if (is_sym("-")) { // non-sealed
                    advance();
                    advance();
                }
            } else {
                return;
            }
        }
    }

    std::string read_qualified() {
        std::string name;
        if (cur().kind != Tok::Ident) return name;
        name = cur().text;
        advance();
        while (is_sym(".") && peek(1).kind == Tok::Ident) {
            advance();
            name += "." + cur().text;
            advance();
        }
        return name;
    }

    void diag(int line, std::string message) {
        result_.diagnostics.push_back({std::string(path_), line, std::move(message)});
    }

    // ---- file header ----
    void parse_header() {
        while (!at_end()) {
            const std::size_t save = i_;
            skip_annotations_and_modifiers();
            if (is_ident("package")) {
                advance();
                package_ = read_qualified();
                if (is_sym(";")) advance();
                continue;
            }
            if (is_ident("import")) {
                advance();
                bool is_static = false;
                if (is_ident("static")) {
                    is_static = true;
                    advance();
                }
                std::string name = read_qualified();
                bool wildcard = false;
                if (is_sym(".") && peek(1).text == "*") {
                    wildcard = true;
                    advance();
                    advance();
                }
                if (is_sym(";")) advance();
                if (name.empty()) continue;
                if (wildcard) {
                    if (!is_static) context_.prefixes.push_back(name + ".");
                    continue;
                }
                if (is_static) {
                    const auto dot = name.rfind('.');
                    if (dot == std::string::npos) continue;
                    name = name.substr(0, dot);
                }
                imports_.push_back(name);
                const auto dot = name.rfind('.');
                context_.aliases[dot == std::string::npos ? name : name.substr(dot + 1)] = name;
                continue;
            }
            i_ = save;
            break;
        }
        // Same-package types come before wildcard imports.
        if (!package_.empty()) context_.prefixes.insert(context_.prefixes.begin(), package_ + ".");
    }

    // ---- declarations ----
    std::vector<std::string> read_type_list() {
        std::vector<std::string> out;
        for (;;) {
            skip_annotations_and_modifiers();
            std::string name = read_qualified();
            if (name.empty()) break;
            out.push_back(std::move(name));
            skip_generics();
            while (is_sym("[") && peek(1).text == "]") {
                advance();
                advance();
            }
            if (!is_sym(",")) break;
            advance();
        }
        return out;
    }

    // Qualified, capitalized type names appearing in a token range.
    std::vector<std::string> type_refs(std::size_t from, std::size_t to) const {
        std::vector<std::string> out;
        std::size_t k = from;
        while (k < to) {
            if (toks_[k].kind != Tok::Ident) {
                ++k;
                continue;
            }
            std::string name = toks_[k].text;
            std::string last = name;
            ++k;
            while (k + 1 < to && toks_[k].kind == Tok::Sym && toks_[k].text == "." &&
                   toks_[k + 1].kind == Tok::Ident) {
                last = toks_[k + 1].text;
                name += "." + last;
                k += 2;
            }
            if (is_capitalized(last)) out.push_back(name);
        }
        return out;
    }

    // First qualified name in a token range; the variable's declared type.
    std::string base_type(std::size_t from, std::size_t to) const {
        const auto refs = type_refs(from, to);
        return refs.empty() ? std::string{} : refs.front();
    }

    void add_relation(const std::string& src, RelationKind kind, const std::string& ref,
                      const std::string& self_name) {
        if (ref.empty() || ref == self_name || ref == src) return;
        RawRelation rel{src, kind, ref, std::nullopt, std::string(path_)};
        for (const auto& existing : result_.relations) {
            if (existing.src_uid == rel.src_uid && existing.kind == rel.kind &&
                existing.target_ref == rel.target_ref) {
                return;
            }
        }
        result_.relations.push_back(std::move(rel));
    }

    void parse_type(std::size_t decl_start, const std::string& prefix, bool top_level) {
        UnitKind kind = UnitKind::Class;
        bool is_interface = false;
        bool is_enum = false;
        if (is_sym("@")) { // annotation type
            advance();
            is_interface = true;
        } else {
            is_interface = cur().text == "interface";
            is_enum = cur().text == "enum";
        }
        if (is_interface) kind = UnitKind::Interface;
        const bool is_record = cur().text == "record";
        advance();
        if (cur().kind != Tok::Ident) {
            diag(cur().line, "expected type name");
            return;
        }
        const std::string name = cur().text;
        const std::string uid = prefix.empty() ? name : prefix + "." + name;
        advance();
        skip_generics();

        const std::size_t unit_index = result_.units.size();
        result_.units.push_back(CodeUnit{uid, kind, name, std::string(path_),
                                         Span{toks_[decl_start].line, toks_[decl_start].line}, "",
                                         {}, ""});
        if (top_level) {
            context_.prefixes.push_back(uid + ".");
            for (const auto& imp : imports_) add_relation(uid, RelationKind::DependsOn, imp, name);
        }

        if (is_record && is_sym("(")) {
            const std::size_t open = i_;
            const std::size_t close = skip_balanced("(", ")");
            for (const auto& ref : type_refs(open + 1, close)) {
                add_relation(uid, RelationKind::DependsOn, ref, name);
            }
        }
        while (!at_end() && !is_sym("{") && !is_sym(";")) {
            if (is_ident("extends")) {
                advance();
                for (const auto& t : read_type_list()) add_relation(uid, RelationKind::DependsOn, t, name);
            } else if (is_ident("implements")) {
                advance();
                for (const auto& t : read_type_list()) add_relation(uid, RelationKind::Implements, t, name);
            } else if (is_ident("permits")) {
                advance();
                read_type_list();
            } else {
                advance();
            }
        }
        if (!is_sym("{")) {
            diag(cur().line, "type " + name + " has no body");
            finish_unit(unit_index, cur().line);
            return;
        }
        advance();
        Member fields;
        parse_body(uid, name, is_enum, unit_index, fields);
        const int end_line = toks_[i_ > 0 ? i_ - 1 : 0].line;
        finish_unit(unit_index, end_line);
    }

    void finish_unit(std::size_t index, int end_line) {
        CodeUnit& u = result_.units[index];
        u.span.end_line = std::max(u.span.start_line, end_line);
        u.source = util::slice_lines(text_, u.span.start_line, u.span.end_line);
    }

    // Positioned just after '{'; consumes through the matching '}'.
    void parse_body(const std::string& uid, const std::string& name, bool is_enum,
                    std::size_t unit_index, Member& fields) {
        if (is_enum) {
            // Constants run until the first top-level ';' or the closing brace.
            while (!at_end() && !is_sym(";") && !is_sym("}")) {
                if (is_sym("(")) skip_balanced("(", ")");
                else if (is_sym("{")) skip_balanced("{", "}");
                else advance();
            }
            if (is_sym(";")) advance();
        }
        struct PendingMethod {
            std::string name;
            std::size_t decl_start;
            std::size_t body_open;
            std::size_t body_close;
            std::map<std::string, std::string> params;
        };
        std::vector<PendingMethod> methods;
        std::vector<std::pair<std::size_t, std::size_t>> initializers;

        while (!at_end() && !is_sym("}")) {
            if (is_sym(";")) {
                advance();
                continue;
            }
            const std::size_t member_start = i_;
            skip_annotations_and_modifiers();
            if (is_type_keyword(cur().text) || (is_sym("@") && peek(1).text == "interface")) {
                parse_type(member_start, uid, /*top_level=*/false);
                continue;
            }
            if (is_sym("{")) { // initializer block
                const std::size_t open = i_;
                const std::size_t close = skip_balanced("{", "}");
                initializers.emplace_back(open + 1, close);
                continue;
            }
            // Scan the member header up to '(' / '=' / ';' / '{' at depth 0.
            const std::size_t header_start = i_;
            int angle = 0;
            while (!at_end()) {
                if (is_sym("<")) ++angle;
                else if (is_sym(">") && angle > 0) --angle;
                else if (angle == 0 && (is_sym("(") || is_sym("=") || is_sym(";") || is_sym("{") ||
                                        is_sym("}"))) {
                    break;
                }
                advance();
            }
            if (is_sym("(") && i_ > header_start && toks_[i_ - 1].kind == Tok::Ident) {
                PendingMethod m;
                m.name = toks_[i_ - 1].text;
                m.decl_start = member_start;
                const std::size_t open = i_;
                const std::size_t close = skip_balanced("(", ")");
                m.params = declared_vars(open + 1, close, /*params=*/true);
                while (!at_end() && !is_sym("{") && !is_sym(";") && !is_sym("}")) advance();
                if (is_sym("{")) {
                    m.body_open = i_;
                    m.body_close = skip_balanced("{", "}");
                } else {
                    m.body_open = m.body_close = i_;
                    if (is_sym(";")) advance();
                }
                methods.push_back(std::move(m));
                continue;
            }
            // Field declaration.
            const std::size_t header_end = i_;
            if (header_end > header_start + 1 && toks_[header_end - 1].kind == Tok::Ident) {
                const std::string field = toks_[header_end - 1].text;
                const std::string type = base_type(header_start, header_end - 1);
                for (const auto& ref : type_refs(header_start, header_end - 1)) {
                    add_relation(uid, RelationKind::DependsOn, ref, name);
                }
                if (!type.empty()) fields.vars[field] = type;
            }
            if (is_sym("=")) {
                const std::size_t init_start = i_;
                while (!at_end() && !is_sym(";") && !is_sym("}")) {
                    if (is_sym("{")) skip_balanced("{", "}");
                    else if (is_sym("(")) skip_balanced("(", ")");
                    else advance();
                }
                initializers.emplace_back(init_start, i_);
            }
            if (is_sym(";")) advance();
            else if (is_sym("{")) skip_balanced("{", "}");
        }
        if (at_end()) diag(cur().line, "unterminated body of " + name);
        else advance(); // '}'

        std::set<std::string> seen_methods;
        for (const auto& m : methods) {
            if (seen_methods.insert(m.name).second) result_.units[unit_index].methods.push_back(m.name);
        }

        for (const auto& [from, to] : initializers) scan_calls(uid, name, from, to, fields.vars);

        std::set<std::string> promoted;
        for (const auto& m : methods) {
            auto vars = fields.vars;
            for (const auto& [k, v] : m.params) vars[k] = v;
            std::string src = uid;
            if (options_.promote_methods) {
                src = uid + "#" + m.name;
                if (!promoted.insert(src).second) {
                    diag(toks_[m.decl_start].line, "overload of " + m.name + " folded into " + src);
                } else {
                    CodeUnit mu{src, UnitKind::Method, m.name, std::string(path_),
                                Span{toks_[m.decl_start].line, toks_[m.body_close].line}, "", {}, uid};
                    mu.span.end_line = std::max(mu.span.start_line, mu.span.end_line);
                    mu.source = util::slice_lines(text_, mu.span.start_line, mu.span.end_line);
                    result_.units.push_back(std::move(mu));
                }
            }
            if (m.body_close > m.body_open) scan_calls(src, name, m.body_open + 1, m.body_close, vars);
        }
    }

    // Declarations of the form `Type name` (optionally generic/array) in a range.
    std::map<std::string, std::string> declared_vars(std::size_t from, std::size_t to, bool params) const {
        std::map<std::string, std::string> vars;
        for (std::size_t k = from; k < to; ++k) {
            if (toks_[k].kind != Tok::Ident) continue;
            const bool type_like = is_capitalized(toks_[k].text) || toks_[k].text == "var";
            if (!type_like) continue;
            // Skip over qualified parts, generics and array brackets.
            std::size_t j = k + 1;
            while (j + 1 < to && toks_[j].text == "." && toks_[j + 1].kind == Tok::Ident) j += 2;
            if (j < to && toks_[j].text == "<") {
                int depth = 0;
                for (; j < to; ++j) {
                    if (toks_[j].text == "<") ++depth;
                    else if (toks_[j].text == ">" && --depth == 0) {
                        ++j;
                        break;
                    }
                }
            }
            while (j + 1 < to && toks_[j].text == "[" && toks_[j + 1].text == "]") j += 2;
            if (j < to && toks_[j].text == "." && j + 2 < to && toks_[j + 1].text == "." ) j += 3; // varargs
            if (j >= to || toks_[j].kind != Tok::Ident) continue;
            const std::size_t after = j + 1;
            const std::string follow = after < to ? toks_[after].text : std::string(params ? "," : ";");
            const bool decl_end = follow == "=" || follow == ";" || follow == "," || follow == ":" ||
                                  (params && (after >= to || follow == ")"));
            if (!decl_end) continue;
            std::string type = base_type(k, j);
            if (toks_[k].text == "var") {
                // var x = new T(...)
                if (follow == "=" && after + 2 < to && toks_[after + 1].text == "new") {
                    type = base_type(after + 2, std::min(to, after + 8));
                } else {
                    type.clear();
                }
            }
            if (!type.empty()) vars[toks_[j].text] = type;
        }
        return vars;
    }

    void scan_calls(const std::string& src, const std::string& self_name, std::size_t from, std::size_t to,
                    std::map<std::string, std::string> vars) {
        for (const auto& [k, v] : declared_vars(from, to, false)) vars[k] = v;
        for (std::size_t k = from; k < to; ++k) {
            const Tok& t = toks_[k];
            if (t.kind != Tok::Ident) continue;
            if (t.text == "new" && k + 1 < to && toks_[k + 1].kind == Tok::Ident) {
                std::size_t j = k + 1;
                std::string type = toks_[j].text;
                while (j + 2 < to && toks_[j + 1].text == "." && toks_[j + 2].kind == Tok::Ident) {
                    type += "." + toks_[j + 2].text;
                    j += 2;
                }
                if (j + 1 < to && (toks_[j + 1].text == "(" || toks_[j + 1].text == "<")) {
                    add_relation(src, RelationKind::Calls, type, self_name);
                }
                continue;
            }
            // recv . method (
            if (k + 3 < to && toks_[k + 1].text == "." && toks_[k + 2].kind == Tok::Ident &&
                toks_[k + 3].text == "(") {
                if (k > from && toks_[k - 1].text == ".") continue; // part of a longer chain
                if (const auto it = vars.find(t.text); it != vars.end()) {
                    add_relation(src, RelationKind::Calls, it->second, self_name);
                } else if (is_capitalized(t.text)) {
                    add_relation(src, RelationKind::Calls, t.text, self_name);
                }
            }
        }
    }

    std::string_view path_;
    std::string_view text_;
    std::vector<Tok> toks_;
    const ParseOptions& options_;
    std::size_t i_ = 0;
    std::string package_;
    std::vector<std::string> imports_;
    ImportContext context_;
    ParseResult result_;
};

class JavaAdapter final : public LanguageAdapter {
public:
    std::string key() const override { return "java"; }

    bool accepts(std::string_view relative_path) const override {
        return util::ends_with(relative_path, ".java");
    }

    ParseResult parse(std::string_view relative_path, std::string_view bytes,
                      const ParseOptions& options) const override {
        return JavaParser(relative_path, bytes, options).run();
    }
};

} // namespace

std::unique_ptr<LanguageAdapter> make_java_adapter() {
    return std::make_unique<JavaAdapter>();
}

} // namespace codegraph::extract

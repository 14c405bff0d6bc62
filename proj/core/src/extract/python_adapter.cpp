#include <codegraph/extract/adapter.hpp>

#include <codegraph/util/text.hpp>

#include <cctype>
#include <map>
#include <regex>
#include <set>

// Python-subset adapter. Units are classes (including nested classes) and
// module-level functions; methods are attached to their class unless
// promoted. Identifiers follow module.path:qualname.
//
//   class C(Base)            -> DEPENDS_ON Base
//   class-level `x: T`       -> DEPENDS_ON T
//   name(...) / mod.name(...) -> CALLS name

namespace codegraph::extract {

namespace {

struct Line {
    int number = 0;      // 1-based, of the first physical line
    int last_number = 0; // last physical line (continuations joined)
    int indent = 0;
    std::string code;    // comments and string contents removed
};

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Splits source into logical lines with comments and string bodies blanked
// out, joining bracket continuations.
std::vector<Line> logical_lines(std::string_view text) {
    std::vector<Line> out;
    const auto physical = util::split_lines(text);
    Line current;
    int depth = 0;
    bool in_triple = false;
    char triple_quote = '"';
    for (std::size_t idx = 0; idx < physical.size(); ++idx) {
        const std::string_view raw = physical[idx];
        const int number = static_cast<int>(idx) + 1;
        std::string code;
        std::size_t i = 0;
        if (!in_triple && depth == 0) {
            current = Line{};
            current.number = number;
            while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t')) {
                current.indent += raw[i] == '\t' ? 8 : 1;
                ++i;
            }
        }
        while (i < raw.size()) {
            const char c = raw[i];
            if (in_triple) {
                if (raw.substr(i, 3) == std::string(3, triple_quote)) {
                    in_triple = false;
                    code += "\"\"";
                    i += 3;
                } else {
                    ++i;
                }
                continue;
            }
            if (c == '#') break;
            if (c == '"' || c == '\'') {
                if (raw.substr(i, 3) == std::string(3, c)) {
                    in_triple = true;
                    triple_quote = c;
                    i += 3;
                    continue;
                }
                std::size_t k = i + 1;
                while (k < raw.size() && raw[k] != c) k += raw[k] == '\\' ? 2 : 1;
                code += "\"\"";
                i = std::min(raw.size(), k + 1);
                continue;
            }
            if (c == '(' || c == '[' || c == '{') ++depth;
            if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
            code += c;
            ++i;
        }
        if (!current.code.empty() && !code.empty()) current.code += ' ';
        current.code += code;
        current.last_number = number;
        const bool backslash = !code.empty() && code.back() == '\\';
        if (backslash) current.code.pop_back();
        if (!in_triple && depth == 0 && !backslash) {
            if (!util::trim(current.code).empty()) {
                current.code = std::string(util::trim(current.code));
                out.push_back(current);
            }
            current = Line{};
        }
    }
    if (!util::trim(current.code).empty()) {
        current.code = std::string(util::trim(current.code));
        out.push_back(current);
    }
    return out;
}

const std::set<std::string>& keywords() {
    static const std::set<std::string> k{
        "if",    "elif",   "else",   "while",  "for",   "return", "and",    "or",     "not",
        "in",    "is",     "lambda", "with",   "assert", "yield", "await",  "del",    "raise",
        "print", "super",  "def",    "class",  "except", "import", "from",  "as",     "pass",
        "async", "global", "nonlocal", "try",  "finally", "self", "cls",    "None",   "True",
        "False"};
    return k;
}

std::string module_for(std::string_view relative_path) {
    std::string mod(relative_path);
    if (util::ends_with(mod, ".py")) mod.resize(mod.size() - 3);
    for (auto& c : mod) {
        if (c == '/') c = '.';
    }
    if (util::ends_with(mod, ".__init__")) mod.resize(mod.size() - 9);
    return mod;
}

class PythonParser {
public:
    PythonParser(std::string_view path, std::string_view text, const ParseOptions& options)
        : path_(path), text_(text), options_(options), module_(module_for(path)) {
        context_.prefixes.push_back(module_ + ":");
    }

    ParseResult run() {
        lines_ = logical_lines(text_);
        for (const auto& l : lines_) collect_imports(l);

        struct Scope {
            int indent;
            std::size_t unit_index; // owning unit, or npos
            std::string qualname;   // class qualname for nesting
            bool is_class;
            std::size_t call_target; // unit receiving CALLS from this block
        };
        std::vector<Scope> stack;
        static const std::regex class_re(R"(^class\s+([A-Za-z_]\w*)\s*(\((.*)\))?\s*:)");
        static const std::regex def_re(R"(^(async\s+)?def\s+([A-Za-z_]\w*)\s*\()");
        static const std::regex annot_re(R"(^([A-Za-z_]\w*)\s*:\s*([A-Za-z_][\w\.]*))");
        constexpr std::size_t npos = static_cast<std::size_t>(-1);

        for (std::size_t li = 0; li < lines_.size(); ++li) {
            const Line& line = lines_[li];
            while (!stack.empty() && line.indent <= stack.back().indent) {
                close_scope(stack.back().unit_index, li);
                stack.pop_back();
            }
            const Scope* enclosing = stack.empty() ? nullptr : &stack.back();
            std::smatch m;
            if (std::regex_search(line.code, m, class_re) &&
                (enclosing == nullptr || enclosing->is_class)) {
                const std::string name = m[1].str();
                const std::string qual = enclosing ? enclosing->qualname + "." + name : name;
                const std::string uid = module_ + ":" + qual;
                const std::size_t idx = open_unit(uid, UnitKind::Class, name, li, "");
                if (m[3].matched) {
                    for (const auto& base : util::split(m[3].str(), ',')) {
                        std::string b(util::trim(base));
                        if (b.empty() || b.find('=') != std::string::npos) continue;
                        const auto paren = b.find('[');
                        if (paren != std::string::npos) b.resize(paren);
                        add_relation(uid, RelationKind::DependsOn, qualify(b), name);
                    }
                }
                stack.push_back({line.indent, idx, qual, true, idx});
                continue;
            }
            if (std::regex_search(line.code, m, def_re)) {
                const std::string name = m[2].str();
                if (enclosing == nullptr) {
                    const std::string uid = module_ + ":" + name;
                    const std::size_t idx = open_unit(uid, UnitKind::Function, name, li, "");
                    stack.push_back({line.indent, idx, name, false, idx});
                    scan_calls(line.code.substr(static_cast<std::size_t>(m.position(0) + m.length(0))),
                               idx);
                    continue;
                }
                if (enclosing->is_class) {
                    CodeUnit& owner = result_.units[enclosing->unit_index];
                    if (std::find(owner.methods.begin(), owner.methods.end(), name) == owner.methods.end()) {
                        owner.methods.push_back(name);
                    }
                    std::size_t target = enclosing->unit_index;
                    std::size_t own = npos;
                    if (options_.promote_methods) {
                        const std::string uid = module_ + ":" + enclosing->qualname + "." + name;
                        if (uids_.count(uid)) {
                            diag(line.number, "redefinition of " + uid + " folded");
                        } else {
                            own = open_unit(uid, UnitKind::Method, name, li, owner.uid);
                            target = own;
                        }
                    }
                    stack.push_back({line.indent, own, enclosing->qualname, false, target});
                    continue;
                }
                // Nested function: calls belong to the enclosing unit.
                stack.push_back({line.indent, npos, enclosing->qualname, false, enclosing->call_target});
                continue;
            }
            if (enclosing == nullptr) continue;
            if (enclosing->is_class && std::regex_search(line.code, m, annot_re) &&
                line.code.find('(') == std::string::npos) {
                add_relation(result_.units[enclosing->unit_index].uid, RelationKind::DependsOn,
                             qualify(m[2].str()), result_.units[enclosing->unit_index].name);
            }
            if (enclosing->call_target != npos) scan_calls(line.code, enclosing->call_target);
        }
        while (!stack.empty()) {
            close_scope(stack.back().unit_index, lines_.size());
            stack.pop_back();
        }
        result_.contexts[std::string(path_)] = context_;
        return std::move(result_);
    }

private:
    void diag(int line, std::string message) {
        result_.diagnostics.push_back({std::string(path_), line, std::move(message)});
    }

    std::string package_base() const {
        // Package containing this module ("a.b" for "a/b/c.py" and "a/b/__init__.py").
        const bool is_init = util::ends_with(path_, "__init__.py");
        if (is_init) return module_;
        const auto dot = module_.rfind('.');
        return dot == std::string::npos ? std::string{} : module_.substr(0, dot);
    }

    std::string absolute_module(const std::string& spec) const {
        std::size_t dots = 0;
        while (dots < spec.size() && spec[dots] == '.') ++dots;
        if (dots == 0) return spec;
        std::string base = package_base();
        for (std::size_t k = 1; k < dots; ++k) {
            const auto dot = base.rfind('.');
            base = dot == std::string::npos ? std::string{} : base.substr(0, dot);
        }
        const std::string rest = spec.substr(dots);
        if (base.empty()) return rest;
        return rest.empty() ? base : base + "." + rest;
    }

    void collect_imports(const Line& line) {
        static const std::regex import_re(R"(^import\s+(.+)$)");
        static const std::regex from_re(R"(^from\s+([\w\.]+)\s+import\s+\(?([^\)]*)\)?\s*$)");
        std::smatch m;
        if (std::regex_search(line.code, m, from_re)) {
            const std::string mod = absolute_module(m[1].str());
            for (const auto& part : util::split(m[2].str(), ',')) {
                const auto words = util::split(std::string(util::collapse_spaces(part)), ' ');
                if (words.empty() || words[0].empty() || words[0] == "*") continue;
                const std::string& name = words[0];
                const std::string alias = words.size() == 3 && words[1] == "as" ? words[2] : name;
                name_aliases_[alias] = mod + ":" + name;
                module_aliases_[alias] = mod.empty() ? name : mod + "." + name;
                context_.aliases[alias] = mod + ":" + name;
            }
            return;
        }
        if (std::regex_search(line.code, m, import_re)) {
            for (const auto& part : util::split(m[1].str(), ',')) {
                const auto words = util::split(std::string(util::collapse_spaces(part)), ' ');
                if (words.empty() || words[0].empty()) continue;
                const std::string& mod = words[0];
                if (words.size() == 3 && words[1] == "as") module_aliases_[words[2]] = mod;
                else module_aliases_[mod] = mod;
            }
        }
    }

    // Maps a reference as written to the best qualified form available locally.
    std::string qualify(const std::string& ref) const {
        const auto dot = ref.rfind('.');
        if (dot == std::string::npos) {
            const auto it = name_aliases_.find(ref);
            return it == name_aliases_.end() ? ref : it->second;
        }
        const std::string owner = ref.substr(0, dot);
        const std::string leaf = ref.substr(dot + 1);
        if (const auto it = module_aliases_.find(owner); it != module_aliases_.end()) {
            return it->second + ":" + leaf;
        }
        return ref;
    }

    std::size_t open_unit(const std::string& uid, UnitKind kind, const std::string& name, std::size_t li,
                          const std::string& parent) {
        int start = lines_[li].number;
        // Include decorators directly above the declaration.
        for (std::size_t k = li; k > 0; --k) {
            const Line& prev = lines_[k - 1];
            if (prev.indent != lines_[li].indent || prev.code.empty() || prev.code.front() != '@') break;
            start = prev.number;
        }
        if (uids_.count(uid)) diag(lines_[li].number, "duplicate definition of " + uid);
        uids_.insert(uid);
        result_.units.push_back(CodeUnit{uid, kind, name, std::string(path_), Span{start, start}, "", {}, parent});
        return result_.units.size() - 1;
    }

    void close_scope(std::size_t unit_index, std::size_t next_line) {
        if (unit_index == static_cast<std::size_t>(-1)) return;
        CodeUnit& u = result_.units[unit_index];
        int end = u.span.start_line;
        // Last logical line before next_line that belongs to the block.
        if (next_line > 0) end = std::max(end, lines_[next_line - 1].last_number);
        u.span.end_line = end;
        u.source = util::slice_lines(text_, u.span.start_line, u.span.end_line);
    }

    void scan_calls(const std::string& code, std::size_t unit_index) {
        const CodeUnit& unit = result_.units[unit_index];
        const std::string src = unit.uid;
        // Classes and methods own their class name; functions their own name.
        const std::string self_name = unit.kind == UnitKind::Method
                                          ? std::string{}
                                          : unit.name;
        for (std::size_t i = 0; i < code.size(); ++i) {
            if (!(std::isalpha(static_cast<unsigned char>(code[i])) || code[i] == '_')) continue;
            if (i > 0 && (is_ident_char(code[i - 1]) || code[i - 1] == '.')) continue;
            std::size_t k = i;
            while (k < code.size() && (is_ident_char(code[k]) || code[k] == '.')) ++k;
            std::string ref = code.substr(i, k - i);
            std::size_t j = k;
            while (j < code.size() && code[j] == ' ') ++j;
            const bool is_call = j < code.size() && code[j] == '(';
            i = k;
            if (!is_call || ref.empty() || ref.back() == '.') continue;
            const auto dot = ref.find('.');
            const std::string head = dot == std::string::npos ? ref : ref.substr(0, dot);
            if (keywords().count(head)) continue;
            if (dot != std::string::npos && !module_aliases_.count(ref.substr(0, ref.rfind('.')))) continue;
            const std::string target = qualify(ref);
            if (target == self_name) continue;
            add_relation(src, RelationKind::Calls, target, self_name);
        }
    }

    void add_relation(const std::string& src, RelationKind kind, const std::string& ref,
                      const std::string& self_name) {
        if (ref.empty() || ref == self_name || ref == src) return;
        for (const auto& r : result_.relations) {
            if (r.src_uid == src && r.kind == kind && r.target_ref == ref) return;
        }
        result_.relations.push_back(RawRelation{src, kind, ref, std::nullopt, std::string(path_)});
    }

    std::string_view path_;
    std::string_view text_;
    const ParseOptions& options_;
    std::string module_;
    std::vector<Line> lines_;
    std::map<std::string, std::string> name_aliases_;
    std::map<std::string, std::string> module_aliases_;
    std::set<std::string> uids_;
    ImportContext context_;
    ParseResult result_;
};

class PythonAdapter final : public LanguageAdapter {
public:
    std::string key() const override { return "python"; }

    bool accepts(std::string_view relative_path) const override {
        return util::ends_with(relative_path, ".py");
    }

    ParseResult parse(std::string_view relative_path, std::string_view bytes,
                      const ParseOptions& options) const override {
        return PythonParser(relative_path, bytes, options).run();
    }
};

} // namespace

std::unique_ptr<LanguageAdapter> make_python_adapter() {
    return std::make_unique<PythonAdapter>();
}

} // namespace codegraph::extract

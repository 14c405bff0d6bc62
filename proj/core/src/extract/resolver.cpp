#include <codegraph/extract/resolver.hpp>

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace codegraph::extract {

namespace {
bool is_bare(const std::string& ref) {
    return ref.find('.') == std::string::npos && ref.find(':') == std::string::npos &&
           ref.find('#') == std::string::npos;
}
} // namespace

Resolution resolve_references(const std::vector<CodeUnit>& units, const std::vector<RawRelation>& relations,
                              const std::map<std::string, ImportContext>& contexts) {
    std::unordered_set<std::string> uids;
    std::unordered_map<std::string, std::vector<std::string>> by_simple_name;
    for (const auto& u : units) {
        uids.insert(u.uid);
        // Methods are never the target of a bare type reference.
        if (u.kind != UnitKind::Method) by_simple_name[u.name].push_back(u.uid);
    }
    for (auto& [name, list] : by_simple_name) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }

    Resolution out;
    out.outcome.reserve(relations.size());
    for (const auto& rel : relations) {
        const std::string& ref = rel.target_ref;
        std::optional<std::string> hit;
        bool ambiguous = false;

        if (uids.count(ref)) hit = ref;

        if (!hit) {
            if (const auto ctx = contexts.find(rel.context); ctx != contexts.end()) {
                const ImportContext& c = ctx->second;
                if (const auto a = c.aliases.find(ref); a != c.aliases.end() && uids.count(a->second)) {
                    hit = a->second;
                }
                if (!hit) {
                    const auto dot = ref.find('.');
                    if (dot != std::string::npos) {
                        const auto a = c.aliases.find(ref.substr(0, dot));
                        if (a != c.aliases.end() && uids.count(a->second + ref.substr(dot))) {
                            hit = a->second + ref.substr(dot);
                        }
                    }
                }
                for (std::size_t p = 0; !hit && p < c.prefixes.size(); ++p) {
                    if (uids.count(c.prefixes[p] + ref)) hit = c.prefixes[p] + ref;
                }
            }
        }

        if (!hit && is_bare(ref)) {
            if (const auto it = by_simple_name.find(ref); it != by_simple_name.end()) {
                if (it->second.size() == 1) {
                    hit = it->second.front();
                } else {
                    ambiguous = true;
                    std::string candidates;
                    for (const auto& c : it->second) candidates += (candidates.empty() ? "" : ", ") + c;
                    out.report.diagnostics.push_back(
                        {rel.context, 0, "ambiguous reference '" + ref + "' from " + rel.src_uid + ": " + candidates});
                }
            }
        }

        if (hit && *hit == rel.src_uid) hit.reset();

        if (hit) {
            RawRelation r = rel;
            r.resolved = *hit;
            out.relations.push_back(std::move(r));
            ++out.report.resolved;
            out.outcome.push_back(0);
        } else if (ambiguous) {
            ++out.report.ambiguous;
            out.outcome.push_back(2);
        } else {
            ++out.report.unresolved;
            out.outcome.push_back(1);
        }
    }
    return out;
}

} // namespace codegraph::extract

#include <codegraph/extract/builder.hpp>

#include <codegraph/extract/adapter.hpp>
#include <codegraph/extract/resolver.hpp>
#include <codegraph/extract/scanner.hpp>
#include <codegraph/util/parallel.hpp>
#include <codegraph/util/text.hpp>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace codegraph::extract {

RepoCounts ExtractionReport::totals() const {
    RepoCounts t;
    for (const auto& [name, c] : repos) {
        t.files += c.files;
        t.units += c.units;
        t.relations += c.relations;
        t.resolved += c.resolved;
        t.unresolved += c.unresolved;
        t.ambiguous += c.ambiguous;
    }
    return t;
}

std::string ExtractionReport::to_text() const {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %6s %6s %10s %9s %11s %10s\n", "repository", "files", "units",
                  "relations", "resolved", "unresolved", "ambiguous");
    os << line;
    auto row = [&](const std::string& name, const RepoCounts& c) {
        std::snprintf(line, sizeof line, "%-20s %6zu %6zu %10zu %9zu %11zu %10zu\n", name.c_str(), c.files,
                      c.units, c.relations, c.resolved, c.unresolved, c.ambiguous);
        os << line;
    };
    for (const auto& [name, c] : repos) row(name, c);
    row("total", totals());
    if (!diagnostics.empty()) {
        os << "diagnostics:\n";
        for (const auto& d : diagnostics) {
            os << "  " << d.file;
            if (d.line > 0) os << ':' << d.line;
            os << ": " << d.message << '\n';
        }
    }
    return os.str();
}

std::string ExtractionReport::to_json() const {
    nlohmann::json j;
    j["repos"] = nlohmann::json::object();
    for (const auto& [name, c] : repos) {
        j["repos"][name] = {{"files", c.files},       {"units", c.units},
                            {"relations", c.relations}, {"resolved", c.resolved},
                            {"unresolved", c.unresolved}, {"ambiguous", c.ambiguous}};
    }
    j["diagnostics"] = nlohmann::json::array();
    for (const auto& d : diagnostics) {
        j["diagnostics"].push_back({{"file", d.file}, {"line", d.line}, {"message", d.message}});
    }
    return j.dump();
}

NodeId system_node_id(std::string_view system_name) {
    return NodeId("system:" + std::string(system_name));
}

NodeId project_node_id(std::string_view project_name) {
    return NodeId("project:" + std::string(project_name));
}

namespace {

struct FileJob {
    std::size_t repo;
    std::string path;
    ParseResult result;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

StructuralBuild build_structural_graph(const std::vector<RepoSpec>& specs, const std::string& system_name,
                                       const ExtractOptions& options) {
    if (specs.empty()) throw Error(ErrorCode::InvalidArgument, "at least one repository is required");
    {
        std::set<std::string> names;
        for (const auto& s : specs) {
            if (!names.insert(s.name).second) {
                throw Error(ErrorCode::DuplicateProjectName, "duplicate project name: " + s.name);
            }
        }
    }

    StructuralBuild out{CodeGraph(system_name), {}};
    CodeGraph& graph = out.graph;
    const NodeId system_id = system_node_id(system_name);
    graph.add_node(Node{system_id, NodeKind::System, system_name, std::nullopt, std::nullopt, {}});

    std::vector<std::unique_ptr<LanguageAdapter>> adapters;
    std::vector<FileJob> jobs;
    for (std::size_t r = 0; r < specs.size(); ++r) {
        const RepoSpec& spec = specs[r];
        adapters.push_back(make_adapter(spec.language));
        ScanResult scan = scan_repository(spec, *adapters.back(), options.max_file_bytes);
        for (auto& d : scan.diagnostics) {
            d.file = spec.name + "/" + d.file;
            out.report.diagnostics.push_back(std::move(d));
        }
        RepoCounts counts;
        counts.files = scan.files.size();
        out.report.repos.emplace_back(spec.name, counts);
        for (auto& f : scan.files) jobs.push_back(FileJob{r, std::move(f), {}});

        Node project{project_node_id(spec.name), NodeKind::Project, spec.name, std::nullopt, std::nullopt, {}};
        project.attrs["language"] = spec.language;
        project.attrs["root"] = spec.root.generic_string();
        if (!spec.url.empty()) project.attrs["url"] = spec.url;
        graph.add_node(std::move(project));
        graph.add_edge(Edge{system_id, std::string(labels::kContains), project_node_id(spec.name), {}});
    }

    util::parallel_for(jobs.size(), options.workers, [&](std::size_t i) {
        FileJob& job = jobs[i];
        const RepoSpec& spec = specs[job.repo];
        const std::string bytes = read_file(spec.root / job.path);
        job.result = parse_file(*adapters[job.repo], job.path, bytes,
                                ParseOptions{options.promote_methods, spec.root});
    });

    // Deterministic reduce in (repo, path) order.
    std::vector<CodeUnit> units;
    std::vector<std::size_t> unit_repo;
    std::vector<RawRelation> relations;
    std::map<std::string, ImportContext> contexts;
    std::map<std::string, std::size_t> repo_of_uid;
    for (auto& job : jobs) {
        const std::string& repo_name = specs[job.repo].name;
        for (auto& d : job.result.diagnostics) {
            d.file = repo_name + "/" + d.file;
            out.report.diagnostics.push_back(std::move(d));
        }
        for (auto& u : job.result.units) {
            if (repo_of_uid.count(u.uid)) {
                out.report.diagnostics.push_back(
                    {repo_name + "/" + u.file, u.span.start_line, "duplicate unit id " + u.uid + " ignored"});
                continue;
            }
            repo_of_uid[u.uid] = job.repo;
            unit_repo.push_back(job.repo);
            ++out.report.repos[job.repo].second.units;
            units.push_back(std::move(u));
        }
        for (auto& [key, ctx] : job.result.contexts) contexts[repo_name + "/" + key] = std::move(ctx);
        for (auto& rel : job.result.relations) {
            rel.context = repo_name + "/" + rel.context;
            ++out.report.repos[job.repo].second.relations;
            relations.push_back(std::move(rel));
        }
    }

    for (std::size_t i = 0; i < units.size(); ++i) {
        const CodeUnit& u = units[i];
        const RepoSpec& spec = specs[unit_repo[i]];
        Node n{NodeId(u.uid), NodeKind::Code, u.name, std::nullopt, std::nullopt, {}};
        n.attrs[std::string(attrs::kFile)] = u.file;
        n.attrs[std::string(attrs::kSpan)] =
            std::to_string(u.span.start_line) + "-" + std::to_string(u.span.end_line);
        n.attrs[std::string(attrs::kLanguage)] = spec.language;
        n.attrs[std::string(attrs::kUnitKind)] = std::string(to_string(u.kind));
        n.attrs[std::string(attrs::kSource)] = u.source;
        if (!u.methods.empty()) n.attrs[std::string(attrs::kMethods)] = util::join(u.methods, ",");
        if (!u.parent_uid.empty()) n.attrs["parent"] = u.parent_uid;
        graph.add_node(std::move(n));
        graph.add_edge(Edge{project_node_id(spec.name), std::string(labels::kContains), NodeId(u.uid), {}});
    }

    Resolution resolution = resolve_references(units, relations, contexts);
    for (auto& d : resolution.report.diagnostics) out.report.diagnostics.push_back(std::move(d));
    for (std::size_t i = 0; i < relations.size(); ++i) {
        const auto it = repo_of_uid.find(relations[i].src_uid);
        if (it == repo_of_uid.end()) continue;
        RepoCounts& c = out.report.repos[it->second].second;
        switch (resolution.outcome[i]) {
        case 0: ++c.resolved; break;
        case 1: ++c.unresolved; break;
        default: ++c.ambiguous; break;
        }
    }
    for (const auto& rel : resolution.relations) {
        graph.add_edge(Edge{NodeId(rel.src_uid), std::string(label_of(rel.kind)), NodeId(*rel.resolved), {}});
    }

    graph.validate();
    return out;
}

} // namespace codegraph::extract

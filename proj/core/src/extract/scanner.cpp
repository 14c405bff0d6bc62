#include <codegraph/extract/scanner.hpp>

#include <codegraph/util/text.hpp>

#include <algorithm>

namespace codegraph::extract {

namespace {

bool segment_match(std::string_view pat, std::string_view s) {
    std::size_t p = 0;
    std::size_t i = 0;
    std::size_t star = std::string_view::npos;
    std::size_t mark = 0;
    while (i < s.size()) {
        if (p < pat.size() && (pat[p] == '?' || pat[p] == s[i])) {
            ++p;
            ++i;
        } else if (p < pat.size() && pat[p] == '*') {
            star = p++;
            mark = i;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            i = ++mark;
        } else {
            return false;
        }
    }
    while (p < pat.size() && pat[p] == '*') ++p;
    return p == pat.size();
}

bool match_segments(const std::vector<std::string>& pat, std::size_t pi, const std::vector<std::string>& path,
                    std::size_t si) {
    if (pi == pat.size()) return si == path.size();
    if (pat[pi] == "**") {
        for (std::size_t k = si; k <= path.size(); ++k) {
            if (match_segments(pat, pi + 1, path, k)) return true;
        }
        return false;
    }
    return si < path.size() && segment_match(pat[pi], path[si]) && match_segments(pat, pi + 1, path, si + 1);
}

} // namespace

bool glob_match(std::string_view pattern, std::string_view path) {
    if (pattern.find('/') == std::string_view::npos) {
        // Slash-free patterns test the file name in any directory.
        const auto slash = path.rfind('/');
        return segment_match(pattern, slash == std::string_view::npos ? path : path.substr(slash + 1));
    }
    return match_segments(util::split(pattern, '/'), 0, util::split(path, '/'), 0);
}

ScanResult scan_repository(const RepoSpec& spec, std::uintmax_t max_file_bytes) {
    const auto adapter = make_adapter(spec.language);
    return scan_repository(spec, *adapter, max_file_bytes);
}

ScanResult scan_repository(const RepoSpec& spec, const LanguageAdapter& adapter, std::uintmax_t max_file_bytes) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(spec.root, ec)) {
        throw Error(ErrorCode::IoFailure, "repository root is not a directory: " + spec.root.string());
    }
    ScanResult result;
    fs::recursive_directory_iterator it(spec.root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot traverse " + spec.root.string() + ": " + ec.message());
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) throw Error(ErrorCode::IoFailure, "cannot traverse " + spec.root.string() + ": " + ec.message());
        const fs::path& p = it->path();
        const std::string leaf = p.filename().string();
        if (it->is_directory(ec)) {
            if (!leaf.empty() && leaf.front() == '.') it.disable_recursion_pending();
            continue;
        }
        if (!it->is_regular_file(ec)) continue;
        const std::string rel = fs::relative(p, spec.root, ec).generic_string();
        if (ec || rel.empty()) continue;
        if (!adapter.accepts(rel)) continue;
        if (!spec.include.empty() &&
            std::none_of(spec.include.begin(), spec.include.end(),
                         [&](const std::string& g) { return glob_match(g, rel); })) {
            continue;
        }
        if (std::any_of(spec.exclude.begin(), spec.exclude.end(),
                        [&](const std::string& g) { return glob_match(g, rel); })) {
            continue;
        }
        const auto size = it->file_size(ec);
        if (!ec && size > max_file_bytes) {
            result.diagnostics.push_back({rel, 0, "skipped: " + std::to_string(size) + " bytes exceeds the " +
                                                      std::to_string(max_file_bytes) + "-byte cap"});
            continue;
        }
        result.files.push_back(rel);
    }
    std::sort(result.files.begin(), result.files.end());
    return result;
}

} // namespace codegraph::extract

#include <codegraph/enrich/prompts.hpp>

#include <codegraph/error.hpp>
#include <codegraph/util/text.hpp>

#include <fstream>
#include <sstream>
#include <utility>

namespace codegraph::enrich {

namespace detail {
extern const std::pair<std::string_view, std::string_view> kBuiltinPrompts[];
extern const std::size_t kBuiltinPromptCount;
} // namespace detail

std::string PromptTemplate::hash() const {
    return util::hash_hex(text);
}

std::string render(std::string_view text, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find("{{", pos);
        if (open == std::string_view::npos) break;
        const auto close = text.find("}}", open + 2);
        if (close == std::string_view::npos) break;
        out.append(text.substr(pos, open - pos));
        const std::string key(util::trim(text.substr(open + 2, close - open - 2)));
        if (auto it = vars.find(key); it != vars.end()) {
            out.append(it->second);
        } else {
            out.append(text.substr(open, close + 2 - open));
        }
        pos = close + 2;
    }
    out.append(text.substr(pos));
    return out;
}

PromptLibrary PromptLibrary::defaults() {
    PromptLibrary lib;
    for (std::size_t i = 0; i < detail::kBuiltinPromptCount; ++i) {
        const auto& [name, text] = detail::kBuiltinPrompts[i];
        lib.templates_.emplace(std::string(name), PromptTemplate{std::string(name), std::string(text)});
    }
    return lib;
}

PromptLibrary PromptLibrary::from_directory(const std::filesystem::path& dir) {
    auto lib = defaults();
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw Error(ErrorCode::ConfigError, "prompt directory not found: " + dir.string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        const auto name = entry.path().stem().string();
        if (lib.templates_.find(name) == lib.templates_.end()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        lib.templates_[name] = PromptTemplate{name, buf.str()};
    }
    return lib;
}

const PromptTemplate& PromptLibrary::get(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw Error(ErrorCode::ConfigError, "unknown prompt template: " + std::string(name));
    return it->second;
}

} // namespace codegraph::enrich

#include <codegraph/snapshot.hpp>

#include <codegraph/util/text.hpp>

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace codegraph {

using json = nlohmann::json;

namespace {

constexpr std::string_view kMagic = "CLGS";

std::string dump(const json& j) {
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string quote(std::string_view s) {
    return dump(json(std::string(s)));
}

json attrs_json(const Attrs& attrs) {
    json j = json::object();
    for (const auto& [k, v] : attrs) j[k] = v;
    return j;
}

std::string encode_floats(const Embedding& v) {
    std::string bytes(v.size() * 4, '\0');
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(v[i]);
        for (int b = 0; b < 4; ++b) {
            bytes[i * 4 + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xFF);
        }
    }
    return util::base64_encode(bytes);
}

Embedding decode_floats(std::string_view b64, std::size_t dim) {
    const std::string bytes = util::base64_decode(b64);
    if (bytes.size() != dim * 4) {
        throw Error(ErrorCode::CorruptSnapshot, "embedding payload does not match its dimension");
    }
    Embedding v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) {
            bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + static_cast<std::size_t>(b)]))
                    << (8 * b);
        }
        v[i] = std::bit_cast<float>(bits);
    }
    return v;
}

[[noreturn]] void corrupt(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::CorruptSnapshot,
                "corrupt snapshot at line " + std::to_string(line) + ": " + what);
}

// Sequential reader over the space-separated fields of one record.
class FieldReader {
public:
    FieldReader(std::string_view line, std::size_t line_no) : s_(line), line_(line_no) {}

    bool at_end() {
        skip();
        return i_ >= s_.size();
    }

    std::string_view word() {
        skip();
        const std::size_t start = i_;
        while (i_ < s_.size() && s_[i_] != ' ') ++i_;
        if (start == i_) corrupt(line_, "missing field");
        return s_.substr(start, i_ - start);
    }

    json value() {
        skip();
        const std::size_t start = i_;
        if (i_ >= s_.size()) corrupt(line_, "missing JSON field");
        if (s_[i_] == '"') {
            ++i_;
            while (i_ < s_.size() && s_[i_] != '"') i_ += s_[i_] == '\\' ? 2 : 1;
            if (i_ >= s_.size()) corrupt(line_, "unterminated string");
            ++i_;
        } else if (s_[i_] == '{' || s_[i_] == '[') {
            int depth = 0;
            bool in_str = false;
            for (; i_ < s_.size(); ++i_) {
                const char c = s_[i_];
                if (in_str) {
                    if (c == '\\') ++i_;
                    else if (c == '"') in_str = false;
                    continue;
                }
                if (c == '"') in_str = true;
                else if (c == '{' || c == '[') ++depth;
                else if ((c == '}' || c == ']') && --depth == 0) {
                    ++i_;
                    break;
                }
            }
            if (depth != 0) corrupt(line_, "unbalanced JSON value");
        } else {
            corrupt(line_, "expected JSON value");
        }
        try {
            return json::parse(s_.substr(start, i_ - start));
        } catch (const json::exception& e) {
            corrupt(line_, e.what());
        }
    }

    std::string string_value() {
        json j = value();
        if (!j.is_string()) corrupt(line_, "expected JSON string");
        return j.get<std::string>();
    }

    Attrs attrs_value() {
        json j = value();
        if (!j.is_object()) corrupt(line_, "expected JSON object");
        Attrs out;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!it.value().is_string()) corrupt(line_, "attribute values must be strings");
            out[it.key()] = it.value().get<std::string>();
        }
        return out;
    }

private:
    void skip() {
        while (i_ < s_.size() && s_[i_] == ' ') ++i_;
    }

    std::string_view s_;
    std::size_t line_;
    std::size_t i_ = 0;
};

} // namespace

std::string serialize_snapshot(const CodeGraph& graph) {
    std::ostringstream os;
    os << kMagic << ' ' << CodeGraph::kSchemaVersion << ' ' << quote(graph.system_name()) << '\n';
    json meta = json::object();
    for (const auto& [k, v] : graph.meta()) meta[k] = v;
    os << "M " << dump(meta) << '\n';
    for (const auto& [id, n] : graph.nodes()) {
        os << "N " << quote(id.str()) << ' ' << to_string(n.kind) << ' ' << quote(n.name) << ' '
           << dump(attrs_json(n.attrs));
        if (n.description) os << ' ' << quote(*n.description);
        os << '\n';
    }
    for (const auto& e : graph.sorted_edges()) {
        os << "E " << quote(e.src.str()) << ' ' << e.label << ' ' << quote(e.dst.str()) << ' '
           << dump(attrs_json(e.attrs)) << '\n';
    }
    for (const auto& [id, n] : graph.nodes()) {
        if (!n.embedding) continue;
        os << "V " << quote(id.str()) << ' ' << n.embedding->size() << ' ' << encode_floats(*n.embedding)
           << '\n';
    }
    std::string body = os.str();
    char crc[16];
    std::snprintf(crc, sizeof crc, "%08x", util::crc32(body));
    body += "C ";
    body += crc;
    body += '\n';
    return body;
}

CodeGraph parse_snapshot(std::string_view bytes) {
    const std::size_t header_end = bytes.find('\n');
    if (header_end == std::string_view::npos) corrupt(1, "missing header");
    {
        FieldReader header(bytes.substr(0, header_end), 1);
        if (header.word() != kMagic) corrupt(1, "bad magic");
        const std::string_view version = header.word();
        if (version != std::to_string(CodeGraph::kSchemaVersion)) {
            throw Error(ErrorCode::VersionMismatch,
                        "snapshot schema version " + std::string(version) + " is not supported (expected " +
                            std::to_string(CodeGraph::kSchemaVersion) + ")");
        }
    }

    // Trailer: "C xxxxxxxx\n" covering every byte before it.
    if (bytes.size() < 12 || bytes.back() != '\n') corrupt(0, "missing checksum trailer");
    const std::size_t trailer = bytes.rfind('\n', bytes.size() - 2);
    if (trailer == std::string_view::npos) corrupt(0, "missing checksum trailer");
    const std::string_view body = bytes.substr(0, trailer + 1);
    const std::string_view crc_line = bytes.substr(trailer + 1, bytes.size() - trailer - 2);
    char expected[16];
    std::snprintf(expected, sizeof expected, "%08x", util::crc32(body));
    if (crc_line.size() != 10 || crc_line.substr(0, 2) != "C " || crc_line.substr(2) != expected) {
        corrupt(0, "checksum mismatch");
    }

    const auto lines = util::split_lines(body);
    CodeGraph graph;
    {
        FieldReader header(lines.at(0), 1);
        header.word();
        header.word();
        graph.set_system_name(header.string_value());
    }
    try {
        for (std::size_t ln = 1; ln < lines.size(); ++ln) {
            FieldReader r(lines[ln], ln + 1);
            const std::string_view tag = r.word();
            if (tag == "M") {
                json meta = r.value();
                if (!meta.is_object()) corrupt(ln + 1, "meta must be an object");
                for (auto it = meta.begin(); it != meta.end(); ++it) {
                    graph.meta()[it.key()] = it.value().get<std::string>();
                }
            } else if (tag == "N") {
                Node n;
                n.id = NodeId(r.string_value());
                const auto kind = parse_node_kind(r.word());
                if (!kind) corrupt(ln + 1, "unknown node kind");
                n.kind = *kind;
                n.name = r.string_value();
                n.attrs = r.attrs_value();
                if (!r.at_end()) n.description = r.string_value();
                graph.add_node(std::move(n));
            } else if (tag == "E") {
                Edge e;
                e.src = NodeId(r.string_value());
                e.label = std::string(r.word());
                e.dst = NodeId(r.string_value());
                e.attrs = r.attrs_value();
                graph.add_edge(std::move(e));
            } else if (tag == "V") {
                const NodeId id(r.string_value());
                const std::string_view dim_text = r.word();
                std::size_t dim = 0;
                for (char c : dim_text) {
                    if (c < '0' || c > '9') corrupt(ln + 1, "bad embedding dimension");
                    dim = dim * 10 + static_cast<std::size_t>(c - '0');
                }
                graph.set_embedding(id, decode_floats(r.word(), dim));
            } else {
                corrupt(ln + 1, "unknown record tag '" + std::string(tag) + "'");
            }
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::CorruptSnapshot) throw;
        throw Error(ErrorCode::CorruptSnapshot, std::string("inconsistent snapshot: ") + e.what());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptSnapshot, std::string("inconsistent snapshot: ") + e.what());
    }
    return graph;
}

void save_snapshot(const CodeGraph& graph, const std::filesystem::path& path) {
    const std::string bytes = serialize_snapshot(graph);
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoFailure, "cannot write snapshot " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorCode::IoFailure, "short write on snapshot " + tmp);
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot move snapshot into place: " + ec.message());
}

CodeGraph load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open snapshot " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_snapshot(buf.str());
}

} // namespace codegraph

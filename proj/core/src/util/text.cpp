#include <codegraph/util/text.hpp>

#include <codegraph/error.hpp>

#include <zlib.h>

#include <array>
#include <cctype>

namespace codegraph::util {

std::uint32_t fnv1a32(std::string_view data) noexcept {
    std::uint32_t h = 2166136261u;
    for (unsigned char c : data) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

std::uint64_t fnv1a64(std::string_view data) noexcept {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::string_view data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::uint64_t h = fnv1a64(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::uint32_t crc32(std::string_view data) noexcept {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks for very large inputs.
    std::size_t offset = 0;
    while (offset < data.size()) {
        const std::size_t n = std::min<std::size_t>(data.size() - offset, 1u << 30);
        crc = ::crc32(crc, reinterpret_cast<const Bytef*>(data.data() + offset),
                      static_cast<uInt>(n));
        offset += n;
    }
    return static_cast<std::uint32_t>(crc);
}

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) noexcept {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}
} // namespace

std::string base64_encode(std::string_view bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const auto a = static_cast<unsigned char>(bytes[i]);
        const auto b = static_cast<unsigned char>(bytes[i + 1]);
        const auto c = static_cast<unsigned char>(bytes[i + 2]);
        out += kB64[a >> 2];
        out += kB64[((a & 0x3) << 4) | (b >> 4)];
        out += kB64[((b & 0xF) << 2) | (c >> 6)];
        out += kB64[c & 0x3F];
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const auto a = static_cast<unsigned char>(bytes[i]);
        out += kB64[a >> 2];
        out += kB64[(a & 0x3) << 4];
        out += "==";
    } else if (rest == 2) {
        const auto a = static_cast<unsigned char>(bytes[i]);
        const auto b = static_cast<unsigned char>(bytes[i + 1]);
        out += kB64[a >> 2];
        out += kB64[((a & 0x3) << 4) | (b >> 4)];
        out += kB64[(b & 0xF) << 2];
        out += '=';
    }
    return out;
}

std::string base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) {
        throw Error(ErrorCode::CorruptSnapshot, "base64 length is not a multiple of 4");
    }
    std::string out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        std::array<int, 4> v{};
        int pad = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            const char c = text[i + j];
            if (c == '=' && i + 4 == text.size() && j >= 2) {
                v[j] = 0;
                ++pad;
                continue;
            }
            if (pad > 0 || (v[j] = b64_value(c)) < 0) {
                throw Error(ErrorCode::CorruptSnapshot, "invalid base64 payload");
            }
        }
        const std::uint32_t triple = (static_cast<std::uint32_t>(v[0]) << 18) |
                                     (static_cast<std::uint32_t>(v[1]) << 12) |
                                     (static_cast<std::uint32_t>(v[2]) << 6) |
                                     static_cast<std::uint32_t>(v[3]);
        out += static_cast<char>((triple >> 16) & 0xFF);
        if (pad < 2) out += static_cast<char>((triple >> 8) & 0xFF);
        if (pad < 1) out += static_cast<char>(triple & 0xFF);
    }
    return out;
}

std::string_view trim(std::string_view s) noexcept {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < s.size()) {
        std::size_t pos = s.find('\n', start);
        if (pos == std::string_view::npos) pos = s.size();
        std::string_view line = s.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        start = pos + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

bool starts_with(std::string_view s, std::string_view prefix) noexcept {
    return s.substr(0, prefix.size()) == prefix;
}

bool ends_with(std::string_view s, std::string_view suffix) noexcept {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string collapse_spaces(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : trim(s)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = true;
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

namespace {
// Length of the valid UTF-8 sequence at s[i], or 0 when invalid.
std::size_t utf8_sequence_length(std::string_view s, std::size_t i) noexcept {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) return 1;
    if ((c & 0xE0) == 0xC0) {
        len = 2;
        cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
        len = 3;
        cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
        len = 4;
        cp = c & 0x07;
    } else {
        return 0;
    }
    if (i + len > s.size()) return 0;
    for (std::size_t k = 1; k < len; ++k) {
        const auto cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong encodings, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        return 0;
    }
    return len;
}
} // namespace

bool sanitize_utf8(std::string& text) {
    std::string out;
    bool changed = false;
    for (std::size_t i = 0; i < text.size();) {
        const std::size_t len = utf8_sequence_length(text, i);
        if (len == 0) {
            out += "\xEF\xBF\xBD";
            changed = true;
            ++i;
        } else {
            out.append(text, i, len);
            i += len;
        }
    }
    if (changed) text = std::move(out);
    return changed;
}

std::string_view utf8_prefix(std::string_view s, std::size_t max_bytes) noexcept {
    if (s.size() <= max_bytes) return s;
    std::size_t cut = max_bytes;
    while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
    return s.substr(0, cut);
}

std::vector<std::string> split_identifier(std::string_view ident) {
    std::vector<std::string> words;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) words.push_back(std::move(current));
        current.clear();
    };
    for (std::size_t i = 0; i < ident.size(); ++i) {
        const char c = ident[i];
        if (!std::isalnum(static_cast<unsigned char>(c))) {
            flush();
            continue;
        }
        if (std::isupper(static_cast<unsigned char>(c)) && !current.empty()) {
            const bool prev_lower = std::islower(static_cast<unsigned char>(current.back())) ||
                                    std::isdigit(static_cast<unsigned char>(current.back()));
            const bool next_lower = i + 1 < ident.size() &&
                                    std::islower(static_cast<unsigned char>(ident[i + 1]));
            // "orderDTO" splits before D; "DTOModel" splits before M.
            if (prev_lower || next_lower) flush();
        }
        current += c;
    }
    flush();
    return words;
}

std::string slice_lines(std::string_view text, int first, int last) {
    if (first < 1 || last < first) return {};
    std::size_t pos = 0;
    int line = 1;
    while (line < first && pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) return {};
        pos = nl + 1;
        ++line;
    }
    if (line < first) return {};
    const std::size_t begin = pos;
    while (line < last && pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            pos = text.size();
            break;
        }
        pos = nl + 1;
        ++line;
    }
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    return std::string(text.substr(begin, end - begin));
}

std::size_t estimate_tokens(std::string_view text) noexcept {
    return (text.size() + 3) / 4;
}

} // namespace codegraph::util

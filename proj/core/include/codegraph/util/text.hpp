#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace codegraph::util {

std::uint32_t fnv1a32(std::string_view data) noexcept;
std::uint64_t fnv1a64(std::string_view data) noexcept;
// 16 lowercase hex digits of fnv1a64.
std::string hash_hex(std::string_view data);

std::uint32_t crc32(std::string_view data) noexcept;

std::string base64_encode(std::string_view bytes);
// Throws Error(CorruptSnapshot) on characters outside the alphabet.
std::string base64_decode(std::string_view text);

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string_view> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with(std::string_view s, std::string_view prefix) noexcept;
bool ends_with(std::string_view s, std::string_view suffix) noexcept;
std::string to_lower(std::string_view s);
std::string collapse_spaces(std::string_view s);

// Replaces invalid UTF-8 sequences with U+FFFD. Returns true when anything changed.
bool sanitize_utf8(std::string& text);

// Cuts at most max_bytes without splitting a UTF-8 code point.
std::string_view utf8_prefix(std::string_view s, std::size_t max_bytes) noexcept;

// "OrderDTO" -> {"Order", "DTO"}; "http_client" -> {"http", "client"}.
std::vector<std::string> split_identifier(std::string_view ident);

// Lines [first, last], 1-based inclusive, including their newlines except a final one.
std::string slice_lines(std::string_view text, int first, int last);

// ceil(chars / 4)
std::size_t estimate_tokens(std::string_view text) noexcept;

} // namespace codegraph::util

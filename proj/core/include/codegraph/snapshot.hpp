#pragma once

#include <codegraph/graph.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace codegraph {

// Text snapshot layout, one record per line:
//
//   CLGS <schema_version> <json system name>
//   M <json meta object>
//   N <json id> <Kind> <json name> <json attrs> [<json description>]
//   E <json src> <LABEL> <json dst> <json attrs>
//   V <json id> <dim> <base64 little-endian f32 values>
//   C <crc32 of every preceding byte, 8 lowercase hex digits>
//
// Nodes are ordered by id, edges by (src, label, dst).
std::string serialize_snapshot(const CodeGraph& graph);
CodeGraph parse_snapshot(std::string_view bytes);

void save_snapshot(const CodeGraph& graph, const std::filesystem::path& path);
CodeGraph load_snapshot(const std::filesystem::path& path);

} // namespace codegraph

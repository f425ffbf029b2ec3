#pragma once

#include <string>

#include "json.hpp"

#include "ident/graph.hpp"

namespace ident {

// Graph JSON: {"vertices": [...], "hidden": [...], "fixed": [...],
//              "directed": [[tail, head], ...], "bidirected": [[u, v], ...]}
// `hidden` and `fixed` are optional. Unknown keys are rejected.
MixedGraph graph_from_json(const nlohmann::json& j);
MixedGraph graph_from_json_text(const std::string& text);
MixedGraph load_graph(const std::string& path);

nlohmann::json graph_to_json(const MixedGraph& g);

// Canonical text: fixed key order, sorted members, one key per line.
std::string canonical_graph_json(const MixedGraph& g);

std::string graph_to_dot(const MixedGraph& g);

// Shared helpers for the other file formats.
std::string read_file(const std::string& path);
std::string json_string_list(const VertexSet& s);

}  // namespace ident

#include "ident/graph_io.hpp"

#include <fstream>
#include <sstream>

#include "ident/error.hpp"

namespace ident {

using nlohmann::json;

namespace {

VertexSet string_set(const json& j, const char* key) {
  if (!j.is_array()) {
    throw InvalidInput(std::string("'") + key + "' must be an array");
  }
  VertexSet out;
  for (const auto& item : j) {
    if (!item.is_string()) {
      throw InvalidInput(std::string("'") + key +
                         "' must contain only strings");
    }
    auto name = item.get<std::string>();
    if (!is_valid_vertex_name(name)) {
      throw InvalidInput("invalid vertex name '" + name + "'");
    }
    if (!out.insert(name).second) {
      throw InvalidInput("duplicate vertex '" + name + "' in '" + key + "'");
    }
  }
  return out;
}

std::vector<Edge> edge_list(const json& j, const char* key) {
  if (!j.is_array()) {
    throw InvalidInput(std::string("'") + key + "' must be an array");
  }
  std::vector<Edge> out;
  for (const auto& item : j) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_string() ||
        !item[1].is_string()) {
      throw InvalidInput(std::string("'") + key +
                         "' entries must be [string, string] pairs");
    }
    out.emplace_back(item[0].get<std::string>(), item[1].get<std::string>());
  }
  return out;
}

std::string pair_list(const std::set<Edge>& edges) {
  std::string out = "[";
  bool first = true;
  for (const auto& [a, b] : edges) {
    if (!first) out += ", ";
    first = false;
    out += "[" + json(a).dump() + ", " + json(b).dump() + "]";
  }
  return out + "]";
}

std::string dot_id(const std::string& name) { return json(name).dump(); }

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string json_string_list(const VertexSet& s) {
  std::string out = "[";
  bool first = true;
  for (const auto& v : s) {
    if (!first) out += ", ";
    first = false;
    out += json(v).dump();
  }
  return out + "]";
}

MixedGraph graph_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("graph JSON must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "vertices" && key != "hidden" && key != "fixed" &&
        key != "directed" && key != "bidirected") {
      throw InvalidInput("unknown key '" + key + "' in graph JSON");
    }
  }
  if (!j.contains("vertices")) throw InvalidInput("missing 'vertices'");
  VertexSet vertices = string_set(j.at("vertices"), "vertices");
  VertexSet hidden =
      j.contains("hidden") ? string_set(j.at("hidden"), "hidden") : VertexSet{};
  VertexSet fixed =
      j.contains("fixed") ? string_set(j.at("fixed"), "fixed") : VertexSet{};
  auto directed = j.contains("directed") ? edge_list(j.at("directed"), "directed")
                                         : std::vector<Edge>{};
  auto bidirected = j.contains("bidirected")
                        ? edge_list(j.at("bidirected"), "bidirected")
                        : std::vector<Edge>{};

  for (const auto& s : {&hidden, &fixed}) {
    for (const auto& v : *s) {
      if (!vertices.count(v)) throw UnknownVertex(v);
    }
  }
  VertexSet random;
  for (const auto& v : vertices) {
    if (!fixed.count(v)) random.insert(v);
  }
  std::set<Edge> d, b;
  for (const auto& e : directed) {
    if (!d.insert(e).second) {
      throw InvalidInput("duplicate directed edge " + e.first + " -> " +
                         e.second);
    }
  }
  for (const auto& e : bidirected) {
    if (!b.insert(bidirected_key(e.first, e.second)).second) {
      throw InvalidInput("duplicate bidirected edge " + e.first + " <-> " +
                         e.second);
    }
  }
  return MixedGraph(std::move(random), std::move(fixed), std::move(hidden),
                    std::move(d), std::move(b));
}

MixedGraph graph_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed graph JSON: ") + e.what(), e.byte);
  }
  return graph_from_json(j);
}

MixedGraph load_graph(const std::string& path) {
  return graph_from_json_text(read_file(path));
}

json graph_to_json(const MixedGraph& g) {
  json j = json::object();
  j["vertices"] = g.vertices();
  j["hidden"] = g.hidden();
  j["fixed"] = g.fixed();
  j["directed"] = json::array();
  for (const auto& [t, h] : g.directed_edges()) j["directed"].push_back({t, h});
  j["bidirected"] = json::array();
  for (const auto& [u, v] : g.bidirected_edges()) {
    j["bidirected"].push_back({u, v});
  }
  return j;
}

std::string canonical_graph_json(const MixedGraph& g) {
  std::string out = "{\n";
  out += "  \"vertices\": " + json_string_list(g.vertices()) + ",\n";
  out += "  \"hidden\": " + json_string_list(g.hidden()) + ",\n";
  out += "  \"fixed\": " + json_string_list(g.fixed()) + ",\n";
  out += "  \"directed\": " + pair_list(g.directed_edges()) + ",\n";
  out += "  \"bidirected\": " + pair_list(g.bidirected_edges()) + "\n";
  out += "}\n";
  return out;
}

std::string graph_to_dot(const MixedGraph& g) {
  std::string out = "digraph G {\n";
  for (const auto& v : g.vertices()) {
    out += "  " + dot_id(v);
    if (g.is_fixed(v)) {
      out += " [shape=box]";
    } else if (g.hidden().count(v)) {
      out += " [style=dotted]";
    }
    out += ";\n";
  }
  for (const auto& [t, h] : g.directed_edges()) {
    out += "  " + dot_id(t) + " -> " + dot_id(h) + ";\n";
  }
  for (const auto& [u, v] : g.bidirected_edges()) {
    out += "  " + dot_id(u) + " -> " + dot_id(v) +
           " [dir=both, style=dashed];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace ident

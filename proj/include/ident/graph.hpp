#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ident {

using Vertex = std::string;
// Ordered lexicographically, which fixes the iteration order of every
// algorithm that walks a set.
using VertexSet = std::set<Vertex>;
using Edge = std::pair<Vertex, Vertex>;

bool is_valid_vertex_name(const std::string& name);

// One graph type for hidden-variable DAGs, ADMGs and conditional ADMGs.
//
// Vertices are split into random and fixed ones; a subset of the random
// vertices may be marked hidden (only for plain DAG inputs). Directed edges
// are (tail, head) pairs; bidirected edges are stored with the smaller name
// first. The constructor validates every structural invariant and the value
// is immutable afterwards.
class MixedGraph {
 public:
  MixedGraph() = default;
  MixedGraph(VertexSet random, VertexSet fixed, VertexSet hidden,
             std::set<Edge> directed, std::set<Edge> bidirected);

  // Plain ADMG: every vertex random, nothing hidden.
  static MixedGraph admg(const VertexSet& vertices,
                         const std::vector<Edge>& directed,
                         const std::vector<Edge>& bidirected = {});
  // DAG with designated hidden vertices.
  static MixedGraph dag(const VertexSet& vertices,
                        const std::vector<Edge>& directed,
                        const VertexSet& hidden = {});

  const VertexSet& random() const { return random_; }
  const VertexSet& fixed() const { return fixed_; }
  const VertexSet& hidden() const { return hidden_; }
  const std::set<Edge>& directed_edges() const { return directed_; }
  const std::set<Edge>& bidirected_edges() const { return bidirected_; }

  VertexSet vertices() const;
  bool contains(const Vertex& v) const;
  bool is_random(const Vertex& v) const { return random_.count(v) > 0; }
  bool is_fixed(const Vertex& v) const { return fixed_.count(v) > 0; }
  bool has_directed(const Vertex& tail, const Vertex& head) const;
  bool has_bidirected(const Vertex& u, const Vertex& v) const;

  // One-step neighbourhoods of a single vertex.
  const VertexSet& parents_of(const Vertex& v) const;
  const VertexSet& children_of(const Vertex& v) const;
  const VertexSet& siblings_of(const Vertex& v) const;

  // Throws UnknownVertex for the first member of `s` not in the graph.
  void require_vertices(const VertexSet& s) const;

  friend bool operator==(const MixedGraph& a, const MixedGraph& b) {
    return a.random_ == b.random_ && a.fixed_ == b.fixed_ &&
           a.hidden_ == b.hidden_ && a.directed_ == b.directed_ &&
           a.bidirected_ == b.bidirected_;
  }

 private:
  void validate() const;
  void index();

  VertexSet random_;
  VertexSet fixed_;
  VertexSet hidden_;
  std::set<Edge> directed_;
  std::set<Edge> bidirected_;

  std::map<Vertex, VertexSet> parents_;
  std::map<Vertex, VertexSet> children_;
  std::map<Vertex, VertexSet> siblings_;
};

Edge bidirected_key(const Vertex& u, const Vertex& v);

// Reflexive-transitive closures along directed edges.
VertexSet ancestors(const MixedGraph& g, const VertexSet& s);
VertexSet descendants(const MixedGraph& g, const VertexSet& s);
VertexSet parents(const MixedGraph& g, const VertexSet& s);
VertexSet children(const MixedGraph& g, const VertexSet& s);

// Bidirected-connected components over the random vertices, ordered by
// their least member.
std::vector<VertexSet> districts(const MixedGraph& g);
// District of a single random vertex.
VertexSet district_of(const MixedGraph& g, const Vertex& v);
bool is_bidirected_connected(const MixedGraph& g, const VertexSet& s);

MixedGraph induced_subgraph(const MixedGraph& g, const VertexSet& s);

// Y together with every vertex that has a directed path into Y on which no
// vertex lies in A.
VertexSet ancestral_avoiding(const MixedGraph& g, const VertexSet& y,
                             const VertexSet& a);

MixedGraph latent_project(const MixedGraph& g);

enum class ColliderPathReading {
  // A single edge is a collider path (it has no triples to violate).
  kSingleEdgeCounts,
  // Only paths with at least two edges contribute endpoints.
  kLengthTwoOrMore,
};

struct ColliderBlanketOptions {
  ColliderPathReading reading = ColliderPathReading::kSingleEdgeCounts;
  // Restrict the search to v and its non-descendants, i.e. the ancestral
  // set in which the blanket conditions.
  bool within_nondescendants = true;
};

// Random vertices that are parents of v or endpoints of collider paths
// starting at v. See ColliderBlanketOptions for the two readings.
VertexSet collider_blanket(const MixedGraph& g, const Vertex& v,
                           ColliderBlanketOptions options = {});

// Returns a directed cycle if the directed edges have one, else empty.
std::vector<Vertex> find_directed_cycle(const VertexSet& vertices,
                                        const std::set<Edge>& directed);

std::string to_string(const VertexSet& s);

}  // namespace ident

#pragma once

#include <variant>
#include <vector>

#include "ident/graph.hpp"

namespace ident {

// Ordered list of distinct vertices, each fixable after the ones before it.
struct FixingSequence {
  std::vector<Vertex> steps;

  friend bool operator==(const FixingSequence&, const FixingSequence&) =
      default;
};

// Greedy search got stuck: `residual` are the requested vertices that could
// not be fixed, `stuck` the CADMG at that point.
struct NotReachable {
  FixingSequence prefix;
  VertexSet residual;
  MixedGraph stuck;
};

using SequenceSearch = std::variant<FixingSequence, NotReachable>;

// True iff no other vertex is both a descendant of r and in r's district.
bool is_fixable(const MixedGraph& g, const Vertex& r);

// Moves r to the fixed set and drops every edge with an arrowhead at r.
MixedGraph fix(const MixedGraph& g, const Vertex& r);

// Repeatedly fixes the lexicographically least fixable member of j. Order
// never matters for success, so no backtracking is needed.
SequenceSearch find_valid_sequence(const MixedGraph& g, const VertexSet& j);

// Replays `seq`, throwing FixabilityViolation (with a 1-based step) at the
// first step that is not fixable.
MixedGraph fix_all(const MixedGraph& g, const FixingSequence& seq);

// Smallest reachable superset of s.
VertexSet reachable_closure(const MixedGraph& g, const VertexSet& s);
bool is_reachable(const MixedGraph& g, const VertexSet& s);
bool is_intrinsic(const MixedGraph& g, const VertexSet& d);

}  // namespace ident

#pragma once

// Reference implementations written directly from the definitions, with no
// shared code paths: adjacency matrices, explicit path enumeration and
// exhaustive search over orderings.

#include <map>
#include <vector>

#include "ident/graph.hpp"
#include "ident/prob_table.hpp"

namespace testing_support {

// Latent projection by enumerating every simple path between observed
// vertices whose interior is hidden.
ident::MixedGraph bf_latent_project(const ident::MixedGraph& dag);

ident::VertexSet bf_descendants(const ident::MixedGraph& g, const ident::Vertex& v);
ident::VertexSet bf_district(const ident::MixedGraph& g, const ident::Vertex& v);
bool bf_is_fixable(const ident::MixedGraph& g, const ident::Vertex& v);
ident::MixedGraph bf_fix(const ident::MixedGraph& g, const ident::Vertex& v);

// Every valid ordering of j (each permutation checked step by step).
std::vector<std::vector<ident::Vertex>> bf_valid_orderings(
    const ident::MixedGraph& g, const ident::VertexSet& j);
bool bf_reachable(const ident::MixedGraph& g, const ident::VertexSet& s);
// Smallest reachable superset, found by scanning supersets by size. Returns
// every minimal one so callers can check uniqueness.
std::vector<ident::VertexSet> bf_minimal_reachable_supersets(
    const ident::MixedGraph& g, const ident::VertexSet& s);

// Outcomes plus vertices with a treatment-avoiding directed path to one.
ident::VertexSet bf_y_star(const ident::MixedGraph& g, const ident::VertexSet& y,
                           const ident::VertexSet& a);

// p(targets | given) straight from a joint table.
double bf_conditional(const ident::ProbTable& joint,
                      const std::map<ident::Vertex, int>& targets,
                      const std::map<ident::Vertex, int>& given = {});

}  // namespace testing_support

#pragma once

#include <cstdint>
#include <random>

#include "ident/graph.hpp"
#include "ident/identify.hpp"
#include "ident/prob_table.hpp"

namespace testing_support {

using Rng = std::mt19937_64;

double uniform01(Rng& rng);
int uniform_int(Rng& rng, int lo, int hi);  // inclusive

// ADMG over n vertices with names shuffled against the topological order.
ident::MixedGraph random_admg(Rng& rng, int n, double p_directed,
                              double p_bidirected);

// DAG with n_observed observed and n_hidden hidden vertices. Every hidden
// vertex gets at least two children when possible so it induces confounding.
ident::MixedGraph random_hidden_dag(Rng& rng, int n_observed, int n_hidden,
                                    double p_directed);

// Non-empty outcomes, possibly empty treatments, disjoint, over the random
// non-hidden vertices of g.
ident::Query random_query(Rng& rng, const ident::MixedGraph& g);

// Uniform random subset of s (may be empty).
ident::VertexSet random_subset(Rng& rng, const ident::VertexSet& s);

// Strictly positive normalised joint over the given variables.
ident::ProbTable random_joint(Rng& rng, const std::vector<ident::Vertex>& vars,
                              const std::vector<int>& cards);

}  // namespace testing_support

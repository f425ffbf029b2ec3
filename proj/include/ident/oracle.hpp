#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "ident/graph.hpp"
#include "ident/identify.hpp"
#include "ident/prob_table.hpp"

namespace ident {

inline constexpr double kPositivityFloor = 1e-3;

// Discrete structural causal model stored distributionally: one conditional
// probability table per vertex of a DAG (hidden vertices allowed).
//
// CPT layout: rows are parent assignments in row-major order over the
// parents sorted by name (last parent fastest); each row holds card(v)
// probabilities.
struct DiscreteScm {
  MixedGraph graph;
  std::map<Vertex, int> cardinalities;
  std::map<Vertex, std::vector<double>> cpts;

  // Throws InvalidInput on any shape/normalisation/positivity violation.
  void validate() const;

  friend bool operator==(const DiscreteScm&, const DiscreteScm&) = default;
};

// Seeded CPT generator. Vertices are visited in name order and rows in CPT
// order; each row draws card(v) uniforms u_i = (x >> 11) * 2^-53 from
// std::mt19937_64(seed) and sets p_i = f + (1 - card(v) f) u_i / sum(u),
// with f the positivity floor.
DiscreteScm random_scm(const MixedGraph& dag,
                       const std::map<Vertex, int>& cardinalities,
                       std::uint64_t seed);
// Same cardinality for every vertex.
DiscreteScm random_scm(const MixedGraph& dag, int cardinality,
                       std::uint64_t seed);

// Joint over the observed vertices (random minus hidden), hidden ones
// summed out.
ProbTable observed_joint(const DiscreteScm& scm);

// Truncated factorisation on the full DAG: drop the CPTs of A, clamp A to
// `treatment`, sum out everything except `outcomes`.
ProbTable interventional(const DiscreteScm& scm,
                         const std::map<Vertex, int>& treatment,
                         const VertexSet& outcomes);

struct VerificationReport {
  std::size_t points = 0;
  double max_deviation = 0.0;
  bool passed = true;
};

// Compares the identified estimand against `interventional` at every
// (outcome, treatment) assignment. `admg` must be the latent projection of
// the SCM's graph.
VerificationReport verify(const DiscreteScm& scm, const MixedGraph& admg,
                          const Query& q, const IdentificationResult& result,
                          double tol);

// DAG whose latent projection is `admg`: every bidirected edge u <-> v is
// replaced by a fresh hidden parent of u and v.
MixedGraph canonical_dag(const MixedGraph& admg);

// SCM JSON: graph keys plus "cardinalities" ({vertex: k}) and "cpts"
// ({vertex: [row-major probabilities]}).
nlohmann::json scm_to_json(const DiscreteScm& scm);
DiscreteScm scm_from_json(const nlohmann::json& j);

}  // namespace ident

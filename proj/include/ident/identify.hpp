#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ident/estimand.hpp"
#include "ident/fixing.hpp"
#include "ident/graph.hpp"

namespace ident {

// p(Y | do(A = a)). Each treatment carries the label used for its value in
// the emitted estimand (the free variable a caller binds at evaluation).
struct Query {
  VertexSet outcomes;
  VertexSet treatments;
  std::map<Vertex, std::string> treatment_values;

  // Labels default to the lower-cased treatment name, primed on collision.
  static Query make(VertexSet outcomes, VertexSet treatments);
};

// Throws InvalidQuery / UnknownVertex when q does not fit g.
void validate_query(const MixedGraph& g, const Query& q);

struct DistrictContext {
  VertexSet district;
  // pa(D) \ D
  VertexSet context;
};

struct Decomposition {
  VertexSet y_star;
  std::vector<DistrictContext> districts;
  // Variable naming each vertex of Y* and A in the assembled estimand:
  // outcome name, summation index, or treatment label.
  std::map<Vertex, std::string> variable;
  // Summation indices over Y* \ Y.
  std::vector<Binder> indices;
};

Decomposition decompose(const MixedGraph& g, const Query& q);

// One fixing step of kernel synthesis.
struct KernelStep {
  Vertex vertex;
  VertexSet descendants;   // random descendants of the vertex, excluding it
  VertexSet conditioning;  // remaining random vertices that are not
                           // descendants
  MixedGraph graph;        // CADMG before the step
  Estimand kernel;         // kernel before the step
};

// Kernel for the random vertices left after replaying `seq` from p(V).
// Variables are named after their vertices. `trace`, when given, receives
// one entry per step.
Estimand synthesize_kernel(const MixedGraph& g, const FixingSequence& seq,
                           std::vector<KernelStep>* trace = nullptr);

// Conditional of `vertex` given `conditioning` within `kernel`, built as a
// quotient of marginals of the kernel.
Estimand kernel_conditional(const Estimand& kernel, const VertexSet& random,
                            const Vertex& vertex,
                            const VertexSet& conditioning);

using DistrictIdentification = std::variant<Estimand, NotReachable>;

// Kernel q_D by fixing V \ D, or NotReachable when fixing gets stuck.
DistrictIdentification identify_district(const MixedGraph& g,
                                         const VertexSet& d);

// Bidirected-connected vertex set whose witness edges direct every member to
// a root.
struct CForest {
  VertexSet vertices;
  VertexSet roots;
  std::set<Edge> witness_edges;

  friend bool operator==(const CForest&, const CForest&) = default;
};

struct HedgeWitness {
  CForest inner;
  CForest outer;
  Query query;
};

enum class HedgeDefect {
  kNone,
  kUnknownVertex,
  kEmptyRoots,
  kRootsOutsideForest,
  kNotBidirectedConnected,
  kForeignWitnessEdge,
  kVertexMissesRoot,
  kNotStrictSubset,
  kInnerMeetsTreatment,
  kNoTreatmentInDifference,
  kRootNotAncestorOfOutcome,
};

const char* to_string(HedgeDefect d);

struct HedgeCheck {
  bool valid = false;
  HedgeDefect defect = HedgeDefect::kNone;
  std::string detail;
  explicit operator bool() const { return valid; }
};

HedgeCheck is_hedge(const MixedGraph& g, const Query& q, const HedgeWitness& w);

// Hedge formed by a non-intrinsic district D of G_{Y*} and its reachable
// closure, rooted at the members of D without children inside D.
HedgeWitness find_hedge(const MixedGraph& g, const Query& q,
                        const VertexSet& d);

struct IdentifiedDistrict {
  VertexSet district;
  VertexSet context;
  FixingSequence sequence;
  Estimand kernel;
};

struct Identified {
  Estimand estimand;
  VertexSet y_star;
  std::vector<IdentifiedDistrict> districts;
};

struct NotIdentified {
  HedgeWitness witness;
  VertexSet failing_district;
  VertexSet closure;
  VertexSet y_star;
  std::vector<VertexSet> districts;
  std::vector<VertexSet> failing_districts;
};

using IdentificationResult = std::variant<Identified, NotIdentified>;

IdentificationResult identify(const MixedGraph& g, const Query& q);

inline bool is_identified(const IdentificationResult& r) {
  return std::holds_alternative<Identified>(r);
}

struct FailureCharacterizations {
  bool hedge_exists = false;
  bool some_district_not_intrinsic = false;
  bool some_district_proper_closure = false;
  std::optional<HedgeWitness> witness;
};

FailureCharacterizations failure_characterizations(const MixedGraph& g,
                                                   const Query& q);

nlohmann::json witness_to_json(const HedgeWitness& w);
nlohmann::json result_to_json(const IdentificationResult& r);

}  // namespace ident

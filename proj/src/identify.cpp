#include "ident/identify.hpp"

#include <algorithm>
#include <cctype>
#include <deque>

#include "ident/error.hpp"
#include "ident/graph_io.hpp"

namespace ident {

using nlohmann::json;

namespace {

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string fresh(const std::string& base, const std::set<std::string>& taken) {
  std::string name = base;
  while (taken.count(name)) name += "'";
  return name;
}

std::vector<Binder> binders_for(const VertexSet& vs) {
  std::vector<Binder> out;
  for (const auto& v : vs) out.push_back({v, v});
  return out;
}

std::vector<Binder> free_binders(const ExprPtr& e) {
  // Kernel variables are named after their vertices.
  auto names = free_variables(e);
  return binders_for(VertexSet(names.begin(), names.end()));
}

bool is_joint_factor(const ExprPtr& e) {
  return e->kind() == ExprKind::kFactor && e->given().empty();
}

// Sum of `e` over the variables of `over`, folding into a joint factor or an
// existing marginal where that is an identity.
ExprPtr marginalize(const ExprPtr& e, const VertexSet& over) {
  if (over.empty()) return e;
  if (is_joint_factor(e)) {
    std::vector<Slot> kept;
    std::size_t dropped = 0;
    for (const auto& s : e->targets()) {
      if (!s.is_constant() && over.count(s.name())) {
        ++dropped;
      } else {
        kept.push_back(s);
      }
    }
    if (dropped == over.size() && !kept.empty()) {
      return Expr::factor(std::move(kept));
    }
  }
  if (e->kind() == ExprKind::kMarginal) {
    std::vector<Binder> merged = e->binders();
    for (auto& b : binders_for(over)) merged.push_back(std::move(b));
    std::sort(merged.begin(), merged.end(),
              [](const Binder& a, const Binder& b) { return a.variable < b.variable; });
    return Expr::marginal(e->body(), std::move(merged));
  }
  return Expr::marginal(e, binders_for(over));
}

ExprPtr conditional(const ExprPtr& kernel, const VertexSet& random,
                    const Vertex& vertex, const VertexSet& conditioning) {
  if (is_joint_factor(kernel)) {
    std::vector<Slot> given;
    for (const auto& c : conditioning) given.push_back(Slot::variable(c, c));
    return Expr::factor({Slot::variable(vertex, vertex)}, std::move(given));
  }
  VertexSet rest, rest_and_vertex;
  for (const auto& v : random) {
    if (v == vertex || conditioning.count(v)) continue;
    rest.insert(v);
  }
  rest_and_vertex = rest;
  rest_and_vertex.insert(vertex);
  return Expr::quotient(marginalize(kernel, rest),
                        marginalize(kernel, rest_and_vertex));
}

// Rewrites a kernel (variables named after vertices) into the assembled
// estimand's naming: free variables through `env`, bound ones renamed to
// fresh lower-case names that avoid `reserved` and enclosing binders.
struct Rebinder {
  const std::set<std::string>& reserved;

  ExprPtr operator()(const ExprPtr& e,
                     const std::map<std::string, Slot>& env,
                     std::set<std::string>& in_scope) const {
    switch (e->kind()) {
      case ExprKind::kFactor: {
        auto map_slots = [&](const std::vector<Slot>& slots) {
          std::vector<Slot> out;
          for (const auto& s : slots) {
            if (s.is_constant()) {
              out.push_back(s);
              continue;
            }
            auto it = env.find(s.name());
            if (it == env.end()) {
              throw PreconditionViolation("kernel variable " + s.name() +
                                          " has no binding");
            }
            out.push_back(it->second);
          }
          return out;
        };
        return Expr::factor(map_slots(e->targets()), map_slots(e->given()));
      }
      case ExprKind::kProduct: {
        std::vector<ExprPtr> ops;
        for (const auto& op : e->operands()) ops.push_back((*this)(op, env, in_scope));
        return Expr::product(std::move(ops));
      }
      case ExprKind::kQuotient:
        return Expr::quotient((*this)(e->numerator(), env, in_scope),
                              (*this)(e->denominator(), env, in_scope));
      case ExprKind::kSum:
      case ExprKind::kMarginal: {
        auto inner_env = env;
        std::vector<Binder> binders;
        std::vector<std::string> added;
        for (const auto& b : e->binders()) {
          std::set<std::string> taken = reserved;
          taken.insert(in_scope.begin(), in_scope.end());
          std::string name = fresh(lower(b.vertex), taken);
          in_scope.insert(name);
          added.push_back(name);
          inner_env[b.variable] = Slot::variable(b.vertex, name);
          binders.push_back({name, b.vertex});
        }
        ExprPtr body = (*this)(e->body(), inner_env, in_scope);
        for (const auto& n : added) in_scope.erase(n);
        return e->kind() == ExprKind::kSum
                   ? Expr::sum(std::move(binders), std::move(body))
                   : Expr::marginal(std::move(body), std::move(binders));
      }
    }
    return e;
  }
};

// Kernels name free variables after their vertices and reuse those names for
// marginalised copies. Renaming the bound copies removes the shadowing.
Estimand hygienic(const ExprPtr& e) {
  std::vector<Binder> free = free_binders(e);
  std::set<std::string> reserved;
  std::map<std::string, Slot> env;
  for (const auto& b : free) {
    reserved.insert(b.variable);
    env[b.variable] = Slot::variable(b.vertex, b.variable);
  }
  std::set<std::string> in_scope;
  return {std::move(free), Rebinder{reserved}(e, env, in_scope)};
}

VertexSet roots_of(const MixedGraph& g, const VertexSet& d) {
  VertexSet roots;
  for (const auto& v : d) {
    const auto& ch = g.children_of(v);
    if (std::none_of(ch.begin(), ch.end(),
                     [&](const Vertex& c) { return d.count(c) > 0; })) {
      roots.insert(v);
    }
  }
  return roots;
}

// Every non-root keeps one out-edge towards a vertex strictly closer to the
// roots (the lexicographically least such), giving a spanning in-forest.
CForest make_forest(const MixedGraph& g, const VertexSet& vertices,
                    const VertexSet& roots) {
  std::map<Vertex, int> dist;
  std::deque<Vertex> queue;
  for (const auto& r : roots) {
    dist[r] = 0;
    queue.push_back(r);
  }
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    for (const auto& p : g.parents_of(v)) {
      if (!vertices.count(p) || dist.count(p)) continue;
      dist[p] = dist[v] + 1;
      queue.push_back(p);
    }
  }
  CForest f{vertices, roots, {}};
  for (const auto& v : vertices) {
    if (roots.count(v) || !dist.count(v)) continue;
    for (const auto& c : g.children_of(v)) {
      auto it = dist.find(c);
      if (vertices.count(c) && it != dist.end() && it->second == dist[v] - 1) {
        f.witness_edges.insert({v, c});
        break;
      }
    }
  }
  return f;
}

void require_plain_admg(const MixedGraph& g) {
  if (!g.hidden().empty() || !g.fixed().empty()) {
    throw InvalidInput(
        "identification needs an ADMG without hidden or fixed vertices");
  }
}

}  // namespace

Query Query::make(VertexSet outcomes, VertexSet treatments) {
  Query q;
  std::set<std::string> taken(outcomes.begin(), outcomes.end());
  for (const auto& a : treatments) {
    std::string label = fresh(lower(a), taken);
    taken.insert(label);
    q.treatment_values[a] = label;
  }
  q.outcomes = std::move(outcomes);
  q.treatments = std::move(treatments);
  return q;
}

void validate_query(const MixedGraph& g, const Query& q) {
  if (q.outcomes.empty()) throw InvalidQuery("empty outcome set");
  for (const auto* s : {&q.outcomes, &q.treatments}) {
    for (const auto& v : *s) {
      if (!g.contains(v)) throw UnknownVertex(v);
      if (!g.is_random(v) || g.hidden().count(v)) {
        throw InvalidQuery("vertex " + v + " is not observed");
      }
    }
  }
  for (const auto& y : q.outcomes) {
    if (q.treatments.count(y)) {
      throw InvalidQuery("outcome intersects treatment at " + y);
    }
  }
  std::set<std::string> labels;
  for (const auto& a : q.treatments) {
    auto it = q.treatment_values.find(a);
    if (it == q.treatment_values.end() || it->second.empty()) {
      throw InvalidQuery("treatment " + a + " has no value label");
    }
    if (q.outcomes.count(it->second) || !labels.insert(it->second).second) {
      throw InvalidQuery("value label '" + it->second + "' is ambiguous");
    }
  }
  if (q.treatment_values.size() != q.treatments.size()) {
    throw InvalidQuery("value labels given for non-treatment vertices");
  }
}

Decomposition decompose(const MixedGraph& g, const Query& q) {
  require_plain_admg(g);
  validate_query(g, q);
  Decomposition out;
  out.y_star = ancestral_avoiding(g, q.outcomes, q.treatments);

  std::set<std::string> taken;
  for (const auto& y : q.outcomes) {
    out.variable[y] = y;
    taken.insert(y);
  }
  for (const auto& [a, label] : q.treatment_values) {
    out.variable[a] = label;
    taken.insert(label);
  }
  for (const auto& v : out.y_star) {
    if (q.outcomes.count(v)) continue;
    std::string name = fresh(lower(v), taken);
    taken.insert(name);
    out.variable[v] = name;
    out.indices.push_back({name, v});
  }

  for (auto& d : districts(induced_subgraph(g, out.y_star))) {
    VertexSet context;
    for (const auto& p : parents(g, d)) {
      if (d.count(p)) continue;
      if (!out.y_star.count(p) && !q.treatments.count(p)) {
        throw PreconditionViolation("context vertex " + p + " of district " +
                                    to_string(d) + " outside Y* and A");
      }
      context.insert(p);
    }
    out.districts.push_back({std::move(d), std::move(context)});
  }
  return out;
}

Estimand synthesize_kernel(const MixedGraph& g, const FixingSequence& seq,
                           std::vector<KernelStep>* trace) {
  std::vector<Slot> all;
  for (const auto& v : g.random()) all.push_back(Slot::variable(v, v));
  ExprPtr kernel = Expr::factor(std::move(all));
  MixedGraph current = g;

  for (std::size_t i = 0; i < seq.steps.size(); ++i) {
    const Vertex& j = seq.steps[i];
    if (!current.is_random(j) || !is_fixable(current, j)) {
      throw FixabilityViolation(j, i + 1);
    }
    VertexSet desc = descendants(current, {j});
    desc.erase(j);
    VertexSet cond;
    for (const auto& v : current.random()) {
      if (v != j && !desc.count(v)) cond.insert(v);
    }
    if (trace) {
      trace->push_back({j, desc, cond, current, hygienic(kernel)});
    }
    if (desc.empty()) {
      // Dividing by q(j | everything else) leaves the sum of q over j.
      kernel = marginalize(kernel, {j});
    } else {
      kernel = Expr::quotient(kernel,
                              conditional(kernel, current.random(), j, cond));
    }
    current = fix(current, j);
  }
  return hygienic(kernel);
}

Estimand kernel_conditional(const Estimand& kernel, const VertexSet& random,
                            const Vertex& vertex,
                            const VertexSet& conditioning) {
  return hygienic(conditional(kernel.root, random, vertex, conditioning));
}

DistrictIdentification identify_district(const MixedGraph& g,
                                         const VertexSet& d) {
  require_plain_admg(g);
  if (!is_bidirected_connected(g, d)) {
    throw PreconditionViolation("district " + to_string(d) +
                                " is not bidirected-connected");
  }
  VertexSet rest;
  for (const auto& v : g.random()) {
    if (!d.count(v)) rest.insert(v);
  }
  auto search = find_valid_sequence(g, rest);
  if (auto* stuck = std::get_if<NotReachable>(&search)) return *stuck;
  return synthesize_kernel(g, std::get<FixingSequence>(search));
}

const char* to_string(HedgeDefect d) {
  switch (d) {
    case HedgeDefect::kNone:
      return "none";
    case HedgeDefect::kUnknownVertex:
      return "unknown_vertex";
    case HedgeDefect::kEmptyRoots:
      return "empty_roots";
    case HedgeDefect::kRootsOutsideForest:
      return "roots_outside_forest";
    case HedgeDefect::kNotBidirectedConnected:
      return "not_bidirected_connected";
    case HedgeDefect::kForeignWitnessEdge:
      return "foreign_witness_edge";
    case HedgeDefect::kVertexMissesRoot:
      return "vertex_misses_root";
    case HedgeDefect::kNotStrictSubset:
      return "not_strict_subset";
    case HedgeDefect::kInnerMeetsTreatment:
      return "inner_meets_treatment";
    case HedgeDefect::kNoTreatmentInDifference:
      return "no_treatment_in_difference";
    case HedgeDefect::kRootNotAncestorOfOutcome:
      return "root_not_ancestor_of_outcome";
  }
  return "?";
}

HedgeCheck is_hedge(const MixedGraph& g, const Query& q, const HedgeWitness& w) {
  auto reject = [](HedgeDefect d, std::string detail) {
    return HedgeCheck{false, d, std::move(detail)};
  };

  auto check_forest = [&](const CForest& f,
                          const char* which) -> std::optional<HedgeCheck> {
    for (const auto& v : f.vertices) {
      if (!g.is_random(v)) {
        return reject(HedgeDefect::kUnknownVertex,
                      std::string(which) + ": " + v);
      }
    }
    if (f.roots.empty()) return reject(HedgeDefect::kEmptyRoots, which);
    for (const auto& r : f.roots) {
      if (!f.vertices.count(r)) {
        return reject(HedgeDefect::kRootsOutsideForest,
                      std::string(which) + ": " + r);
      }
    }
    if (!is_bidirected_connected(g, f.vertices)) {
      return reject(HedgeDefect::kNotBidirectedConnected, which);
    }
    for (const auto& [t, h] : f.witness_edges) {
      if (!f.vertices.count(t) || !f.vertices.count(h) ||
          !g.has_directed(t, h)) {
        return reject(HedgeDefect::kForeignWitnessEdge,
                      std::string(which) + ": " + t + " -> " + h);
      }
    }
    // Everything must reach a root along witness edges.
    VertexSet reached = f.roots;
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& [t, h] : f.witness_edges) {
        if (reached.count(h) && reached.insert(t).second) grew = true;
      }
    }
    if (reached != f.vertices) {
      return reject(HedgeDefect::kVertexMissesRoot, which);
    }
    return std::nullopt;
  };

  if (auto bad = check_forest(w.inner, "inner")) return *bad;
  if (auto bad = check_forest(w.outer, "outer")) return *bad;
  if (w.inner.roots != w.outer.roots) {
    return reject(HedgeDefect::kRootsOutsideForest, "roots differ");
  }
  const VertexSet& f = w.inner.vertices;
  const VertexSet& fp = w.outer.vertices;
  if (f.size() >= fp.size() ||
      !std::includes(fp.begin(), fp.end(), f.begin(), f.end())) {
    return reject(HedgeDefect::kNotStrictSubset, "");
  }
  for (const auto& v : f) {
    if (q.treatments.count(v)) {
      return reject(HedgeDefect::kInnerMeetsTreatment, v);
    }
  }
  bool treatment_in_difference = false;
  for (const auto& v : fp) {
    if (!f.count(v) && q.treatments.count(v)) treatment_in_difference = true;
  }
  if (!treatment_in_difference) {
    return reject(HedgeDefect::kNoTreatmentInDifference, "");
  }
  for (const auto& v : q.outcomes) {
    if (!g.contains(v)) return reject(HedgeDefect::kUnknownVertex, v);
  }
  for (const auto& v : q.treatments) {
    if (!g.contains(v)) return reject(HedgeDefect::kUnknownVertex, v);
  }
  const VertexSet relevant = ancestral_avoiding(g, q.outcomes, q.treatments);
  for (const auto& r : w.inner.roots) {
    if (!relevant.count(r)) {
      return reject(HedgeDefect::kRootNotAncestorOfOutcome, r);
    }
  }
  return {true, HedgeDefect::kNone, ""};
}

HedgeWitness find_hedge(const MixedGraph& g, const Query& q,
                        const VertexSet& d) {
  Decomposition dec = decompose(g, q);
  bool is_district = std::any_of(
      dec.districts.begin(), dec.districts.end(),
      [&](const DistrictContext& c) { return c.district == d; });
  if (!is_district) {
    throw PreconditionViolation(to_string(d) + " is not a district of G_{Y*}");
  }
  if (is_intrinsic(g, d)) {
    throw PreconditionViolation(to_string(d) + " is intrinsic; no hedge");
  }
  VertexSet closure = reachable_closure(g, d);
  VertexSet roots = roots_of(g, d);
  return {make_forest(g, d, roots), make_forest(g, closure, roots), q};
}

IdentificationResult identify(const MixedGraph& g, const Query& q) {
  Decomposition dec = decompose(g, q);

  std::vector<IdentifiedDistrict> done;
  std::vector<VertexSet> failing;
  for (const auto& dc : dec.districts) {
    VertexSet rest;
    for (const auto& v : g.random()) {
      if (!dc.district.count(v)) rest.insert(v);
    }
    auto search = find_valid_sequence(g, rest);
    if (std::holds_alternative<NotReachable>(search)) {
      failing.push_back(dc.district);
      continue;
    }
    auto seq = std::get<FixingSequence>(search);
    Estimand kernel = synthesize_kernel(g, seq);
    done.push_back({dc.district, dc.context, std::move(seq), std::move(kernel)});
  }

  std::vector<VertexSet> all_districts;
  for (const auto& dc : dec.districts) all_districts.push_back(dc.district);

  if (!failing.empty()) {
    NotIdentified out;
    out.failing_district = failing.front();
    out.closure = reachable_closure(g, out.failing_district);
    out.witness = find_hedge(g, q, out.failing_district);
    out.y_star = dec.y_star;
    out.districts = std::move(all_districts);
    out.failing_districts = std::move(failing);
    return out;
  }

  std::set<std::string> reserved;
  for (const auto& [v, name] : dec.variable) reserved.insert(name);
  Rebinder rebind{reserved};

  std::vector<ExprPtr> factors;
  for (const auto& d : done) {
    std::map<std::string, Slot> env;
    for (const auto& b : d.kernel.free) {
      const Vertex& v = b.vertex;
      auto it = dec.variable.find(v);
      if (it != dec.variable.end()) {
        env[b.variable] = Slot::variable(v, it->second);
      } else {
        // The kernel does not depend on vertices outside pa(D) \ D; any
        // value will do for those outside Y* and A.
        env[b.variable] = Slot::constant(v, 0);
      }
    }
    std::set<std::string> in_scope;
    factors.push_back(rebind(d.kernel.root, env, in_scope));
  }
  ExprPtr body = factors.size() == 1 ? factors.front()
                                     : Expr::product(std::move(factors));
  if (!dec.indices.empty()) body = Expr::sum(dec.indices, body);

  Identified out;
  for (const auto& y : q.outcomes) out.estimand.free.push_back({y, y});
  for (const auto& [a, label] : q.treatment_values) {
    out.estimand.free.push_back({label, a});
  }
  out.estimand.root = std::move(body);
  out.y_star = dec.y_star;
  out.districts = std::move(done);
  return out;
}

FailureCharacterizations failure_characterizations(const MixedGraph& g,
                                                   const Query& q) {
  Decomposition dec = decompose(g, q);
  FailureCharacterizations out;
  std::optional<VertexSet> first_failing;
  for (const auto& dc : dec.districts) {
    if (!is_intrinsic(g, dc.district)) {
      out.some_district_not_intrinsic = true;
      if (!first_failing) first_failing = dc.district;
    }
    VertexSet closure = reachable_closure(g, dc.district);
    if (closure.size() > dc.district.size()) {
      out.some_district_proper_closure = true;
    }
  }
  if (first_failing) {
    HedgeWitness w = find_hedge(g, q, *first_failing);
    out.hedge_exists = is_hedge(g, q, w).valid;
    out.witness = std::move(w);
  }
  return out;
}

json witness_to_json(const HedgeWitness& w) {
  auto edges = [](const std::set<Edge>& es) {
    json a = json::array();
    for (const auto& [t, h] : es) a.push_back({t, h});
    return a;
  };
  return {{"inner", w.inner.vertices},
          {"outer", w.outer.vertices},
          {"roots", w.inner.roots},
          {"inner_edges", edges(w.inner.witness_edges)},
          {"outer_edges", edges(w.outer.witness_edges)}};
}

json result_to_json(const IdentificationResult& r) {
  if (const auto* id = std::get_if<Identified>(&r)) {
    json districts = json::array();
    for (const auto& d : id->districts) {
      districts.push_back({{"vertices", d.district},
                           {"context", d.context},
                           {"sequence", d.sequence.steps},
                           {"kernel", to_json(d.kernel)}});
    }
    return {{"status", "identified"},
            {"estimand", to_json(id->estimand)},
            {"text", render_text(id->estimand)},
            {"y_star", id->y_star},
            {"districts", districts}};
  }
  const auto& ni = std::get<NotIdentified>(r);
  return {{"status", "not_identified"},
          {"witness", witness_to_json(ni.witness)},
          {"failing_district", ni.failing_district},
          {"closure", ni.closure},
          {"y_star", ni.y_star},
          {"districts", ni.districts},
          {"failing_districts", ni.failing_districts}};
}

}  // namespace ident

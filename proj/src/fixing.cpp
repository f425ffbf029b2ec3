#include "ident/fixing.hpp"

#include "ident/error.hpp"

namespace ident {

namespace {

void require_random(const MixedGraph& g, const VertexSet& s) {
  for (const auto& v : s) {
    if (!g.contains(v)) throw UnknownVertex(v);
    if (!g.is_random(v)) throw InvalidInput("vertex " + v + " is fixed");
  }
}

}  // namespace

bool is_fixable(const MixedGraph& g, const Vertex& r) {
  require_random(g, {r});
  const VertexSet dis = district_of(g, r);
  for (const auto& w : descendants(g, {r})) {
    if (w != r && dis.count(w)) return false;
  }
  return true;
}

MixedGraph fix(const MixedGraph& g, const Vertex& r) {
  if (!is_fixable(g, r)) throw FixabilityViolation(r, 0);
  VertexSet random = g.random();
  random.erase(r);
  VertexSet fixed = g.fixed();
  fixed.insert(r);
  VertexSet hidden = g.hidden();
  hidden.erase(r);
  std::set<Edge> directed, bidirected;
  for (const auto& e : g.directed_edges()) {
    if (e.second != r) directed.insert(e);
  }
  for (const auto& e : g.bidirected_edges()) {
    if (e.first != r && e.second != r) bidirected.insert(e);
  }
  return MixedGraph(std::move(random), std::move(fixed), std::move(hidden),
                    std::move(directed), std::move(bidirected));
}

SequenceSearch find_valid_sequence(const MixedGraph& g, const VertexSet& j) {
  require_random(g, j);
  FixingSequence seq;
  MixedGraph current = g;
  VertexSet remaining = j;
  while (!remaining.empty()) {
    bool progressed = false;
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      if (is_fixable(current, *it)) {
        current = fix(current, *it);
        seq.steps.push_back(*it);
        remaining.erase(it);
        progressed = true;
        break;
      }
    }
    if (!progressed) {
      return NotReachable{std::move(seq), std::move(remaining),
                          std::move(current)};
    }
  }
  return seq;
}

MixedGraph fix_all(const MixedGraph& g, const FixingSequence& seq) {
  MixedGraph current = g;
  for (std::size_t i = 0; i < seq.steps.size(); ++i) {
    const auto& v = seq.steps[i];
    if (!current.contains(v)) throw UnknownVertex(v);
    if (!current.is_random(v) || !is_fixable(current, v)) {
      throw FixabilityViolation(v, i + 1);
    }
    current = fix(current, v);
  }
  return current;
}

VertexSet reachable_closure(const MixedGraph& g, const VertexSet& s) {
  require_random(g, s);
  VertexSet rest;
  for (const auto& v : g.random()) {
    if (!s.count(v)) rest.insert(v);
  }
  auto result = find_valid_sequence(g, rest);
  VertexSet out = s;
  if (auto* stuck = std::get_if<NotReachable>(&result)) {
    out.insert(stuck->residual.begin(), stuck->residual.end());
  }
  return out;
}

bool is_reachable(const MixedGraph& g, const VertexSet& s) {
  return reachable_closure(g, s) == s;
}

bool is_intrinsic(const MixedGraph& g, const VertexSet& d) {
  require_random(g, d);
  return is_bidirected_connected(g, d) && is_reachable(g, d);
}

}  // namespace ident

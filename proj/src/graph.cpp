#include "ident/graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "ident/error.hpp"

namespace ident {

namespace {

const VertexSet kEmpty;

template <typename Next>
VertexSet closure(const MixedGraph& g, const VertexSet& s, Next next) {
  g.require_vertices(s);
  VertexSet seen = s;
  std::deque<Vertex> queue(s.begin(), s.end());
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    for (const auto& w : next(v)) {
      if (seen.insert(w).second) queue.push_back(w);
    }
  }
  return seen;
}

}  // namespace

CycleDetected::CycleDetected(std::vector<std::string> cycle)
    : InvalidInput([&] {
        std::string msg = "cycle detected:";
        for (std::size_t i = 0; i < cycle.size(); ++i) {
          msg += (i == 0 ? " " : " -> ") + cycle[i];
        }
        if (!cycle.empty()) msg += " -> " + cycle.front();
        return msg;
      }()),
      cycle_(std::move(cycle)) {}

FixabilityViolation::FixabilityViolation(const std::string& vertex,
                                         std::size_t step)
    : Error(step == 0 ? vertex + " not fixable"
                      : vertex + " not fixable at step " + std::to_string(step)),
      vertex_(vertex),
      step_(step) {}

bool is_valid_vertex_name(const std::string& name) {
  if (name.empty()) return false;
  return std::none_of(name.begin(), name.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
           c == '\f' || c == '|' || c == ',' || c == ';';
  });
}

Edge bidirected_key(const Vertex& u, const Vertex& v) {
  return u < v ? Edge{u, v} : Edge{v, u};
}

std::string to_string(const VertexSet& s) {
  std::string out = "{";
  for (const auto& v : s) {
    if (out.size() > 1) out += ", ";
    out += v;
  }
  return out + "}";
}

std::vector<Vertex> find_directed_cycle(const VertexSet& vertices,
                                        const std::set<Edge>& directed) {
  std::map<Vertex, std::vector<Vertex>> out;
  for (const auto& [t, h] : directed) out[t].push_back(h);

  enum class Color { kWhite, kGrey, kBlack };
  std::map<Vertex, Color> color;
  for (const auto& v : vertices) color[v] = Color::kWhite;
  std::vector<Vertex> stack;
  std::vector<Vertex> cycle;

  std::function<bool(const Vertex&)> visit = [&](const Vertex& v) {
    color[v] = Color::kGrey;
    stack.push_back(v);
    for (const auto& w : out[v]) {
      if (color[w] == Color::kGrey) {
        auto it = std::find(stack.begin(), stack.end(), w);
        cycle.assign(it, stack.end());
        return true;
      }
      if (color[w] == Color::kWhite && visit(w)) return true;
    }
    stack.pop_back();
    color[v] = Color::kBlack;
    return false;
  };
  for (const auto& v : vertices) {
    if (color[v] == Color::kWhite && visit(v)) return cycle;
  }
  return {};
}

MixedGraph::MixedGraph(VertexSet random, VertexSet fixed, VertexSet hidden,
                       std::set<Edge> directed, std::set<Edge> bidirected)
    : random_(std::move(random)),
      fixed_(std::move(fixed)),
      hidden_(std::move(hidden)),
      directed_(std::move(directed)) {
  for (const auto& [u, v] : bidirected) {
    if (!bidirected_.insert(bidirected_key(u, v)).second) {
      throw InvalidInput("duplicate bidirected edge " + u + " <-> " + v);
    }
  }
  validate();
  index();
}

MixedGraph MixedGraph::admg(const VertexSet& vertices,
                            const std::vector<Edge>& directed,
                            const std::vector<Edge>& bidirected) {
  std::set<Edge> d;
  for (const auto& e : directed) {
    if (!d.insert(e).second) {
      throw InvalidInput("duplicate directed edge " + e.first + " -> " +
                         e.second);
    }
  }
  return MixedGraph(vertices, {}, {}, std::move(d),
                    std::set<Edge>(bidirected.begin(), bidirected.end()));
}

MixedGraph MixedGraph::dag(const VertexSet& vertices,
                           const std::vector<Edge>& directed,
                           const VertexSet& hidden) {
  std::set<Edge> d;
  for (const auto& e : directed) {
    if (!d.insert(e).second) {
      throw InvalidInput("duplicate directed edge " + e.first + " -> " +
                         e.second);
    }
  }
  return MixedGraph(vertices, {}, hidden, std::move(d), {});
}

void MixedGraph::validate() const {
  for (const auto& s : {&random_, &fixed_}) {
    for (const auto& v : *s) {
      if (!is_valid_vertex_name(v)) {
        throw InvalidInput("invalid vertex name '" + v + "'");
      }
    }
  }
  for (const auto& v : fixed_) {
    if (random_.count(v)) {
      throw InvalidInput("vertex " + v + " is both random and fixed");
    }
  }
  for (const auto& h : hidden_) {
    if (!random_.count(h)) {
      throw InvalidInput("hidden vertex " + h + " is not a random vertex");
    }
  }
  for (const auto& [t, h] : directed_) {
    if (!contains(t)) throw UnknownVertex(t);
    if (!contains(h)) throw UnknownVertex(h);
    if (t == h) throw InvalidInput("self-loop on " + t);
    if (fixed_.count(h)) {
      throw InvalidInput("fixed vertex " + h + " has an incoming edge from " +
                         t);
    }
  }
  for (const auto& [u, v] : bidirected_) {
    if (!contains(u)) throw UnknownVertex(u);
    if (!contains(v)) throw UnknownVertex(v);
    if (u == v) throw InvalidInput("self-loop on " + u);
    if (fixed_.count(u) || fixed_.count(v)) {
      throw InvalidInput("bidirected edge " + u + " <-> " + v +
                         " touches a fixed vertex");
    }
  }
  if (!hidden_.empty() && (!bidirected_.empty() || !fixed_.empty())) {
    throw InvalidInput(
        "a graph with hidden vertices must be a DAG without fixed vertices");
  }
  auto cycle = find_directed_cycle(vertices(), directed_);
  if (!cycle.empty()) throw CycleDetected(std::move(cycle));
}

void MixedGraph::index() {
  for (const auto& v : vertices()) {
    parents_[v];
    children_[v];
    siblings_[v];
  }
  for (const auto& [t, h] : directed_) {
    children_[t].insert(h);
    parents_[h].insert(t);
  }
  for (const auto& [u, v] : bidirected_) {
    siblings_[u].insert(v);
    siblings_[v].insert(u);
  }
}

VertexSet MixedGraph::vertices() const {
  VertexSet all = random_;
  all.insert(fixed_.begin(), fixed_.end());
  return all;
}

bool MixedGraph::contains(const Vertex& v) const {
  return random_.count(v) > 0 || fixed_.count(v) > 0;
}

bool MixedGraph::has_directed(const Vertex& tail, const Vertex& head) const {
  return directed_.count({tail, head}) > 0;
}

bool MixedGraph::has_bidirected(const Vertex& u, const Vertex& v) const {
  return bidirected_.count(bidirected_key(u, v)) > 0;
}

const VertexSet& MixedGraph::parents_of(const Vertex& v) const {
  auto it = parents_.find(v);
  if (it == parents_.end()) throw UnknownVertex(v);
  return it->second;
}

const VertexSet& MixedGraph::children_of(const Vertex& v) const {
  auto it = children_.find(v);
  if (it == children_.end()) throw UnknownVertex(v);
  return it->second;
}

const VertexSet& MixedGraph::siblings_of(const Vertex& v) const {
  auto it = siblings_.find(v);
  if (it == siblings_.end()) return kEmpty;
  return it->second;
}

void MixedGraph::require_vertices(const VertexSet& s) const {
  for (const auto& v : s) {
    if (!contains(v)) throw UnknownVertex(v);
  }
}

VertexSet ancestors(const MixedGraph& g, const VertexSet& s) {
  return closure(g, s, [&](const Vertex& v) { return g.parents_of(v); });
}

VertexSet descendants(const MixedGraph& g, const VertexSet& s) {
  return closure(g, s, [&](const Vertex& v) { return g.children_of(v); });
}

VertexSet parents(const MixedGraph& g, const VertexSet& s) {
  g.require_vertices(s);
  VertexSet out;
  for (const auto& v : s) {
    const auto& p = g.parents_of(v);
    out.insert(p.begin(), p.end());
  }
  return out;
}

VertexSet children(const MixedGraph& g, const VertexSet& s) {
  g.require_vertices(s);
  VertexSet out;
  for (const auto& v : s) {
    const auto& c = g.children_of(v);
    out.insert(c.begin(), c.end());
  }
  return out;
}

VertexSet district_of(const MixedGraph& g, const Vertex& v) {
  if (!g.is_random(v)) {
    if (!g.contains(v)) throw UnknownVertex(v);
    throw InvalidInput("vertex " + v + " is fixed and has no district");
  }
  // Fixed vertices never carry bidirected edges, so this stays random.
  return closure(g, {v}, [&](const Vertex& w) { return g.siblings_of(w); });
}

std::vector<VertexSet> districts(const MixedGraph& g) {
  std::vector<VertexSet> out;
  VertexSet assigned;
  for (const auto& v : g.random()) {
    if (assigned.count(v)) continue;
    VertexSet d = district_of(g, v);
    assigned.insert(d.begin(), d.end());
    out.push_back(std::move(d));
  }
  return out;
}

bool is_bidirected_connected(const MixedGraph& g, const VertexSet& s) {
  if (s.empty()) return false;
  for (const auto& v : s) {
    if (!g.is_random(v)) return false;
  }
  auto sub = induced_subgraph(g, s);
  return district_of(sub, *s.begin()) == s;
}

MixedGraph induced_subgraph(const MixedGraph& g, const VertexSet& s) {
  g.require_vertices(s);
  VertexSet random, fixed, hidden;
  for (const auto& v : s) {
    if (g.is_random(v)) {
      random.insert(v);
      if (g.hidden().count(v)) hidden.insert(v);
    } else {
      fixed.insert(v);
    }
  }
  std::set<Edge> directed, bidirected;
  for (const auto& e : g.directed_edges()) {
    if (s.count(e.first) && s.count(e.second)) directed.insert(e);
  }
  for (const auto& e : g.bidirected_edges()) {
    if (s.count(e.first) && s.count(e.second)) bidirected.insert(e);
  }
  return MixedGraph(std::move(random), std::move(fixed), std::move(hidden),
                    std::move(directed), std::move(bidirected));
}

VertexSet ancestral_avoiding(const MixedGraph& g, const VertexSet& y,
                             const VertexSet& a) {
  g.require_vertices(y);
  g.require_vertices(a);
  for (const auto& v : y) {
    if (a.count(v)) {
      throw InvalidQuery("outcome intersects treatment at " + v);
    }
  }
  VertexSet keep;
  for (const auto& v : g.vertices()) {
    if (!a.count(v)) keep.insert(v);
  }
  return ancestors(induced_subgraph(g, keep), y);
}

MixedGraph latent_project(const MixedGraph& g) {
  if (!g.bidirected_edges().empty() || !g.fixed().empty()) {
    throw InvalidInput(
        "latent projection needs a DAG without bidirected edges or fixed "
        "vertices");
  }
  const VertexSet& hidden = g.hidden();
  VertexSet observed;
  for (const auto& v : g.random()) {
    if (!hidden.count(v)) observed.insert(v);
  }

  // Observed vertices reachable from `start` by directed paths whose
  // interior vertices are all hidden.
  auto observed_frontier = [&](const Vertex& start) {
    VertexSet found;
    VertexSet seen{start};
    std::deque<Vertex> queue{start};
    while (!queue.empty()) {
      Vertex v = queue.front();
      queue.pop_front();
      for (const auto& w : g.children_of(v)) {
        if (!seen.insert(w).second) continue;
        if (hidden.count(w)) {
          queue.push_back(w);
        } else {
          found.insert(w);
        }
      }
    }
    return found;
  };

  std::set<Edge> directed, bidirected;
  for (const auto& v : observed) {
    for (const auto& w : observed_frontier(v)) directed.insert({v, w});
  }
  // A collider-free non-directed path through hidden vertices has a hidden
  // source with hidden-interior directed paths to both endpoints.
  for (const auto& h : hidden) {
    VertexSet f = observed_frontier(h);
    for (auto i = f.begin(); i != f.end(); ++i) {
      for (auto j = std::next(i); j != f.end(); ++j) {
        bidirected.insert({*i, *j});
      }
    }
  }
  return MixedGraph(std::move(observed), {}, {}, std::move(directed),
                    std::move(bidirected));
}

VertexSet collider_blanket(const MixedGraph& g, const Vertex& v,
                           ColliderBlanketOptions options) {
  if (!g.contains(v)) throw UnknownVertex(v);
  if (!g.is_random(v)) {
    throw InvalidInput("collider blanket of fixed vertex " + v);
  }
  const MixedGraph* host = &g;
  MixedGraph restricted;
  if (options.within_nondescendants) {
    VertexSet keep = g.vertices();
    for (const auto& d : descendants(g, {v})) {
      if (d != v) keep.erase(d);
    }
    restricted = induced_subgraph(g, keep);
    host = &restricted;
  }
  const MixedGraph& h = *host;

  VertexSet out;
  for (const auto& p : h.parents_of(v)) {
    if (h.is_random(p)) out.insert(p);
  }

  // Neighbours of `x` reached by an edge with an arrowhead at `x`, and by an
  // edge with an arrowhead at the neighbour.
  auto into = [&](const Vertex& x) {
    VertexSet s = h.parents_of(x);
    const auto& sib = h.siblings_of(x);
    s.insert(sib.begin(), sib.end());
    return s;
  };
  auto out_of = [&](const Vertex& x) {
    VertexSet s = h.children_of(x);
    const auto& sib = h.siblings_of(x);
    s.insert(sib.begin(), sib.end());
    return s;
  };

  const std::size_t min_edges =
      options.reading == ColliderPathReading::kSingleEdgeCounts ? 1 : 2;

  // Enumerate simple paths v - x1 - ... - xk with a collider at every
  // interior vertex. The last vertex reached so far is `tail`; `head_at_tail`
  // records whether the edge used to reach it has an arrowhead at `tail`.
  std::vector<Vertex> path{v};
  std::function<void(const Vertex&)> extend = [&](const Vertex& tail) {
    // Every way of stepping past `tail` makes it interior; the edge into it
    // must already have had an arrowhead at tail, which the caller ensured.
    for (const auto& next : into(tail)) {
      if (std::find(path.begin(), path.end(), next) != path.end()) continue;
      path.push_back(next);
      if (path.size() - 1 >= min_edges && h.is_random(next)) out.insert(next);
      // `next` can become interior only if the edge tail-next has an
      // arrowhead at next, i.e. next is a child or sibling of tail.
      if (out_of(tail).count(next)) extend(next);
      path.pop_back();
    }
  };

  for (const auto& first : [&] {
         VertexSet s = into(v);
         auto o = out_of(v);
         s.insert(o.begin(), o.end());
         return s;
       }()) {
    path.push_back(first);
    if (min_edges <= 1 && h.is_random(first)) out.insert(first);
    if (out_of(v).count(first)) extend(first);
    path.pop_back();
  }
  out.erase(v);
  return out;
}

}  // namespace ident

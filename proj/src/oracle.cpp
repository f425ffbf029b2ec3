#include "ident/oracle.hpp"

#include <cmath>
#include <random>

#include "ident/error.hpp"
#include "ident/graph_io.hpp"

namespace ident {

using nlohmann::json;

namespace {

std::size_t row_count(const DiscreteScm& scm, const Vertex& v) {
  std::size_t rows = 1;
  for (const auto& p : scm.graph.parents_of(v)) {
    rows *= static_cast<std::size_t>(scm.cardinalities.at(p));
  }
  return rows;
}

// Product-of-CPTs enumerator over every vertex of the SCM graph.
class JointWalker {
 public:
  explicit JointWalker(const DiscreteScm& scm) : scm_(scm) {
    for (const auto& v : scm.graph.vertices()) {
      order_.push_back(v);
      cards_.push_back(scm.cardinalities.at(v));
    }
    for (std::size_t i = 0; i < order_.size(); ++i) pos_[order_[i]] = i;
    for (const auto& v : order_) {
      std::vector<std::size_t> ps;
      for (const auto& p : scm.graph.parents_of(v)) ps.push_back(pos_.at(p));
      parent_pos_.push_back(std::move(ps));
    }
  }

  const std::vector<Vertex>& order() const { return order_; }
  const std::vector<int>& cards() const { return cards_; }
  std::size_t position(const Vertex& v) const { return pos_.at(v); }

  // Product of the CPT entries of every vertex not in `skip`.
  double weight(const std::vector<int>& a, const std::vector<bool>& skip) const {
    double w = 1.0;
    for (std::size_t i = 0; i < order_.size(); ++i) {
      if (skip[i]) continue;
      std::size_t row = 0;
      for (std::size_t p : parent_pos_[i]) {
        row = row * static_cast<std::size_t>(cards_[p]) +
              static_cast<std::size_t>(a[p]);
      }
      w *= scm_.cpts.at(order_[i])[row * cards_[i] + a[i]];
    }
    return w;
  }

 private:
  const DiscreteScm& scm_;
  std::vector<Vertex> order_;
  std::vector<int> cards_;
  std::map<Vertex, std::size_t> pos_;
  std::vector<std::vector<std::size_t>> parent_pos_;
};

ProbTable accumulate(const DiscreteScm& scm, const std::map<Vertex, int>& clamp,
                     const std::vector<Vertex>& keep) {
  JointWalker walker(scm);
  std::vector<bool> skip(walker.order().size(), false);
  std::vector<int> cards = walker.cards();
  std::vector<std::pair<std::size_t, int>> clamped;
  for (const auto& [v, value] : clamp) {
    std::size_t p = walker.position(v);
    if (value < 0 || value >= cards[p]) {
      throw InvalidInput("treatment value out of range for " + v);
    }
    skip[p] = true;
    clamped.emplace_back(p, value);
    cards[p] = 1;  // enumerate a single value, patched in below
  }
  std::vector<int> keep_pos, keep_cards;
  for (const auto& v : keep) {
    keep_pos.push_back(static_cast<int>(walker.position(v)));
    keep_cards.push_back(scm.cardinalities.at(v));
  }
  std::size_t cells = 1;
  for (int c : keep_cards) cells *= static_cast<std::size_t>(c);
  std::vector<double> values(cells, 0.0);

  for_each_assignment(cards, [&](const std::vector<int>& raw) {
    std::vector<int> a = raw;
    for (const auto& [p, value] : clamped) a[p] = value;
    double w = walker.weight(a, skip);
    std::size_t off = 0;
    for (std::size_t i = 0; i < keep_pos.size(); ++i) {
      off = off * keep_cards[i] + static_cast<std::size_t>(a[keep_pos[i]]);
    }
    values[off] += w;
  });
  return ProbTable::unchecked(keep, keep_cards, std::move(values));
}

}  // namespace

void DiscreteScm::validate() const {
  if (!graph.bidirected_edges().empty() || !graph.fixed().empty()) {
    throw InvalidInput("SCM graph must be a DAG");
  }
  for (const auto& v : graph.vertices()) {
    auto c = cardinalities.find(v);
    if (c == cardinalities.end()) {
      throw InvalidInput("missing cardinality for " + v);
    }
    if (c->second < 2) throw InvalidInput("cardinality below 2 for " + v);
    auto t = cpts.find(v);
    if (t == cpts.end()) throw InvalidInput("missing CPT for " + v);
    std::size_t rows = row_count(*this, v);
    if (t->second.size() != rows * static_cast<std::size_t>(c->second)) {
      throw InvalidInput("CPT for " + v + " has the wrong shape");
    }
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (int k = 0; k < c->second; ++k) {
        double p = t->second[r * c->second + k];
        if (!(p >= kPositivityFloor - 1e-15)) {
          throw InvalidInput("CPT entry below the positivity floor for " + v);
        }
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-12) {
        throw InvalidInput("CPT row does not sum to 1 for " + v);
      }
    }
  }
  if (cardinalities.size() != graph.vertices().size() ||
      cpts.size() != graph.vertices().size()) {
    throw InvalidInput("SCM tables mention unknown vertices");
  }
}

DiscreteScm random_scm(const MixedGraph& dag,
                       const std::map<Vertex, int>& cardinalities,
                       std::uint64_t seed) {
  if (!dag.bidirected_edges().empty() || !dag.fixed().empty()) {
    throw InvalidInput("random_scm needs a DAG");
  }
  DiscreteScm scm;
  scm.graph = dag;
  for (const auto& v : dag.vertices()) {
    auto it = cardinalities.find(v);
    if (it == cardinalities.end()) {
      throw InvalidInput("missing cardinality for " + v);
    }
    if (it->second < 2) throw InvalidInput("cardinality below 2 for " + v);
    scm.cardinalities[v] = it->second;
  }
  std::mt19937_64 rng(seed);
  for (const auto& v : dag.vertices()) {
    const int card = scm.cardinalities[v];
    const std::size_t rows = row_count(scm, v);
    std::vector<double> cpt;
    cpt.reserve(rows * card);
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> u(card);
      double total = 0.0;
      for (auto& x : u) {
        x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        total += x;
      }
      if (total <= 0.0) {
        for (auto& x : u) x = 1.0;
        total = card;
      }
      const double mass = 1.0 - card * kPositivityFloor;
      double row_sum = 0.0;
      for (int k = 0; k < card; ++k) {
        double p = kPositivityFloor + mass * u[k] / total;
        cpt.push_back(p);
        row_sum += p;
      }
      // Absorb rounding so rows sum to 1 well within 1e-12.
      for (int k = 0; k < card; ++k) cpt[r * card + k] /= row_sum;
    }
    scm.cpts[v] = std::move(cpt);
  }
  return scm;
}

DiscreteScm random_scm(const MixedGraph& dag, int cardinality,
                       std::uint64_t seed) {
  std::map<Vertex, int> cards;
  for (const auto& v : dag.vertices()) cards[v] = cardinality;
  return random_scm(dag, cards, seed);
}

ProbTable observed_joint(const DiscreteScm& scm) {
  std::vector<Vertex> observed;
  for (const auto& v : scm.graph.random()) {
    if (!scm.graph.hidden().count(v)) observed.push_back(v);
  }
  return accumulate(scm, {}, observed);
}

ProbTable interventional(const DiscreteScm& scm,
                         const std::map<Vertex, int>& treatment,
                         const VertexSet& outcomes) {
  for (const auto& [a, value] : treatment) {
    if (!scm.graph.contains(a)) throw UnknownVertex(a);
    if (outcomes.count(a)) {
      throw InvalidQuery("outcome intersects treatment at " + a);
    }
  }
  for (const auto& y : outcomes) {
    if (!scm.graph.contains(y)) throw UnknownVertex(y);
  }
  return accumulate(scm, treatment,
                    std::vector<Vertex>(outcomes.begin(), outcomes.end()));
}

VerificationReport verify(const DiscreteScm& scm, const MixedGraph& admg,
                          const Query& q, const IdentificationResult& result,
                          double tol) {
  const auto* id = std::get_if<Identified>(&result);
  if (!id) throw PreconditionViolation("nothing to verify: not identified");
  if (!(latent_project(scm.graph) == admg)) {
    throw InvalidInput(
        "the SCM's latent projection differs from the identification graph");
  }
  const ProbTable joint = observed_joint(scm);
  Evaluator evaluator(joint);

  std::vector<Vertex> treatments(q.treatments.begin(), q.treatments.end());
  std::vector<Vertex> outcomes(q.outcomes.begin(), q.outcomes.end());
  std::vector<int> a_cards, y_cards;
  for (const auto& a : treatments) a_cards.push_back(scm.cardinalities.at(a));
  for (const auto& y : outcomes) y_cards.push_back(scm.cardinalities.at(y));

  VerificationReport report;
  for_each_assignment(a_cards, [&](const std::vector<int>& a) {
    std::map<Vertex, int> treatment;
    Binding binding;
    for (std::size_t i = 0; i < treatments.size(); ++i) {
      treatment[treatments[i]] = a[i];
      binding[q.treatment_values.at(treatments[i])] = a[i];
    }
    ProbTable truth = interventional(scm, treatment, q.outcomes);
    for_each_assignment(y_cards, [&](const std::vector<int>& y) {
      for (std::size_t i = 0; i < outcomes.size(); ++i) {
        binding[outcomes[i]] = y[i];
      }
      double got = evaluator(id->estimand, binding);
      double want = truth.at(y);
      report.max_deviation = std::max(report.max_deviation, std::abs(got - want));
      ++report.points;
    });
  });
  report.passed = report.max_deviation <= tol;
  return report;
}

MixedGraph canonical_dag(const MixedGraph& admg) {
  if (!admg.fixed().empty() || !admg.hidden().empty()) {
    throw InvalidInput("canonical_dag needs a plain ADMG");
  }
  VertexSet vertices = admg.random();
  std::set<Edge> directed = admg.directed_edges();
  VertexSet hidden;
  for (const auto& [u, v] : admg.bidirected_edges()) {
    std::string h = "U_" + u + "_" + v;
    while (vertices.count(h)) h += "_";
    vertices.insert(h);
    hidden.insert(h);
    directed.insert({h, u});
    directed.insert({h, v});
  }
  return MixedGraph(std::move(vertices), {}, std::move(hidden),
                    std::move(directed), {});
}

json scm_to_json(const DiscreteScm& scm) {
  json j = graph_to_json(scm.graph);
  j.erase("fixed");
  j.erase("bidirected");
  j["cardinalities"] = scm.cardinalities;
  j["cpts"] = scm.cpts;
  return j;
}

DiscreteScm scm_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("SCM JSON must be an object");
  json graph_part = json::object();
  for (const auto& [key, value] : j.items()) {
    if (key == "cardinalities" || key == "cpts") continue;
    graph_part[key] = value;
  }
  DiscreteScm scm;
  scm.graph = graph_from_json(graph_part);
  if (!j.contains("cardinalities") || !j.contains("cpts")) {
    throw InvalidInput("SCM JSON needs 'cardinalities' and 'cpts'");
  }
  try {
    scm.cardinalities = j.at("cardinalities").get<std::map<Vertex, int>>();
    scm.cpts = j.at("cpts").get<std::map<Vertex, std::vector<double>>>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed SCM tables: ") + e.what());
  }
  scm.validate();
  return scm;
}

}  // namespace ident

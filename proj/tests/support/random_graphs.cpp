#include "support/random_graphs.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace testing_support {

using namespace ident;

double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

namespace {

std::vector<std::string> shuffled_names(Rng& rng, int n, const std::string& prefix) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i));
  std::shuffle(names.begin(), names.end(), rng);
  return names;
}

}  // namespace

MixedGraph random_admg(Rng& rng, int n, double p_directed, double p_bidirected) {
  auto names = shuffled_names(rng, n, "V");
  VertexSet vertices(names.begin(), names.end());
  std::vector<Edge> directed, bidirected;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (uniform01(rng) < p_directed) directed.push_back({names[i], names[j]});
      if (uniform01(rng) < p_bidirected) bidirected.push_back({names[i], names[j]});
    }
  }
  return MixedGraph::admg(vertices, directed, bidirected);
}

MixedGraph random_hidden_dag(Rng& rng, int n_observed, int n_hidden,
                             double p_directed) {
  auto names = shuffled_names(rng, n_observed, "V");
  VertexSet vertices(names.begin(), names.end());
  VertexSet hidden;
  std::vector<Edge> directed;
  for (int i = 0; i < n_observed; ++i) {
    for (int j = i + 1; j < n_observed; ++j) {
      if (uniform01(rng) < p_directed) directed.push_back({names[i], names[j]});
    }
  }
  for (int h = 0; h < n_hidden; ++h) {
    std::string name = "H" + std::to_string(h);
    vertices.insert(name);
    hidden.insert(name);
    std::vector<std::string> pool = names;
    std::shuffle(pool.begin(), pool.end(), rng);
    int k = std::min<int>(n_observed, uniform_int(rng, 2, 3));
    for (int c = 0; c < k; ++c) directed.push_back({name, pool[c]});
    // Occasionally chain hidden vertices so projection sees hidden paths.
    if (h > 0 && uniform01(rng) < 0.3) {
      directed.push_back({"H" + std::to_string(h - 1), name});
    }
  }
  return MixedGraph::dag(vertices, directed, hidden);
}

VertexSet random_subset(Rng& rng, const VertexSet& s) {
  VertexSet out;
  for (const auto& v : s) {
    if (uniform01(rng) < 0.5) out.insert(v);
  }
  return out;
}

Query random_query(Rng& rng, const MixedGraph& g) {
  std::vector<Vertex> pool;
  for (const auto& v : g.random()) {
    if (!g.hidden().count(v)) pool.push_back(v);
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  int n_y = uniform_int(rng, 1, std::min<int>(2, static_cast<int>(pool.size())));
  VertexSet y(pool.begin(), pool.begin() + n_y);
  int rest = static_cast<int>(pool.size()) - n_y;
  int n_a = uniform_int(rng, 0, std::min(3, rest));
  VertexSet a(pool.begin() + n_y, pool.begin() + n_y + n_a);
  return Query::make(y, a);
}

ProbTable random_joint(Rng& rng, const std::vector<Vertex>& vars,
                       const std::vector<int>& cards) {
  std::size_t n = 1;
  for (int c : cards) n *= static_cast<std::size_t>(c);
  std::vector<double> values(n);
  double total = 0.0;
  for (auto& v : values) {
    v = 0.05 + uniform01(rng);
    total += v;
  }
  for (auto& v : values) v /= total;
  return ProbTable::unchecked(vars, cards, std::move(values));
}

}  // namespace testing_support

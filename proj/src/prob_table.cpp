#include "ident/prob_table.hpp"

#include <cmath>

#include "ident/error.hpp"

namespace ident {

ProbTable::ProbTable(std::vector<Vertex> variables,
                     std::vector<int> cardinalities, std::vector<double> values)
    : variables_(std::move(variables)),
      cardinalities_(std::move(cardinalities)),
      values_(std::move(values)) {
  check_shape();
  for (double v : values_) {
    if (!(v >= 0.0)) throw InvalidInput("probability table has negative cell");
  }
  if (std::abs(total() - 1.0) > 1e-12) {
    throw InvalidInput("probability table does not sum to 1");
  }
}

ProbTable ProbTable::unchecked(std::vector<Vertex> variables,
                               std::vector<int> cardinalities,
                               std::vector<double> values) {
  ProbTable t;
  t.variables_ = std::move(variables);
  t.cardinalities_ = std::move(cardinalities);
  t.values_ = std::move(values);
  t.check_shape();
  return t;
}

void ProbTable::check_shape() const {
  if (variables_.size() != cardinalities_.size()) {
    throw InvalidInput("table variables and cardinalities differ in length");
  }
  std::size_t cells = 1;
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (cardinalities_[i] < 1) throw InvalidInput("cardinality below 1");
    for (std::size_t k = 0; k < i; ++k) {
      if (variables_[k] == variables_[i]) {
        throw InvalidInput("duplicate table variable " + variables_[i]);
      }
    }
    cells *= static_cast<std::size_t>(cardinalities_[i]);
  }
  if (values_.size() != cells) {
    throw InvalidInput("table has " + std::to_string(values_.size()) +
                       " cells, expected " + std::to_string(cells));
  }
}

int ProbTable::position(const Vertex& v) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i] == v) return static_cast<int>(i);
  }
  return -1;
}

int ProbTable::cardinality(const Vertex& v) const {
  int p = position(v);
  if (p < 0) throw UnknownVertex(v);
  return cardinalities_[p];
}

std::size_t ProbTable::offset(std::span<const int> assignment) const {
  std::size_t off = 0;
  for (std::size_t i = 0; i < cardinalities_.size(); ++i) {
    off = off * cardinalities_[i] + static_cast<std::size_t>(assignment[i]);
  }
  return off;
}

double ProbTable::at(std::span<const int> assignment) const {
  if (assignment.size() != variables_.size()) {
    throw InvalidInput("assignment length does not match table");
  }
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] < 0 || assignment[i] >= cardinalities_[i]) {
      throw InvalidInput("value out of range for " + variables_[i]);
    }
  }
  return values_[offset(assignment)];
}

double ProbTable::at(const std::map<Vertex, int>& assignment) const {
  std::vector<int> a;
  a.reserve(variables_.size());
  for (const auto& v : variables_) {
    auto it = assignment.find(v);
    if (it == assignment.end()) {
      throw InvalidInput("assignment misses variable " + v);
    }
    a.push_back(it->second);
  }
  return at(a);
}

ProbTable ProbTable::marginal(const std::vector<Vertex>& keep) const {
  std::vector<int> pos, cards;
  for (const auto& v : keep) {
    int p = position(v);
    if (p < 0) throw UnknownVertex(v);
    pos.push_back(p);
    cards.push_back(cardinalities_[p]);
  }
  ProbTable out;
  out.variables_ = keep;
  out.cardinalities_ = cards;
  std::size_t cells = 1;
  for (int c : cards) cells *= static_cast<std::size_t>(c);
  out.values_.assign(cells, 0.0);
  std::size_t index = 0;
  for_each_assignment(cardinalities_, [&](const std::vector<int>& a) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      off = off * cards[i] + static_cast<std::size_t>(a[pos[i]]);
    }
    out.values_[off] += values_[index++];
  });
  out.check_shape();
  return out;
}

double ProbTable::total() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

}  // namespace ident

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ident/graph.hpp"

namespace ident {

// Dense table over an ordered list of discrete variables, row-major with the
// last variable varying fastest.
class ProbTable {
 public:
  ProbTable() = default;
  // Validates shape, non-negativity and normalisation (within 1e-12).
  ProbTable(std::vector<Vertex> variables, std::vector<int> cardinalities,
            std::vector<double> values);
  // Shape checks only; for deliberately unnormalised test tables.
  static ProbTable unchecked(std::vector<Vertex> variables,
                             std::vector<int> cardinalities,
                             std::vector<double> values);

  const std::vector<Vertex>& variables() const { return variables_; }
  const std::vector<int>& cardinalities() const { return cardinalities_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  // Position of a variable, or -1.
  int position(const Vertex& v) const;
  int cardinality(const Vertex& v) const;

  std::size_t offset(std::span<const int> assignment) const;
  double at(std::span<const int> assignment) const;
  // Value for a named assignment covering every variable.
  double at(const std::map<Vertex, int>& assignment) const;

  // Table over `keep` (in the given order) with every other variable summed
  // out.
  ProbTable marginal(const std::vector<Vertex>& keep) const;

  double total() const;

  friend bool operator==(const ProbTable&, const ProbTable&) = default;

 private:
  void check_shape() const;

  std::vector<Vertex> variables_;
  std::vector<int> cardinalities_;
  std::vector<double> values_;
};

// Calls f(assignment) for every joint assignment of the given cardinalities
// in lexicographic order.
template <typename F>
void for_each_assignment(const std::vector<int>& cards, F&& f) {
  std::vector<int> a(cards.size(), 0);
  for (int c : cards) {
    if (c <= 0) return;
  }
  while (true) {
    f(static_cast<const std::vector<int>&>(a));
    int i = static_cast<int>(a.size()) - 1;
    while (i >= 0 && ++a[i] == cards[i]) {
      a[i] = 0;
      --i;
    }
    if (i < 0) return;
  }
}

}  // namespace ident

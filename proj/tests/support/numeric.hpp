#pragma once

#include <algorithm>
#include <cmath>
#include <map>

#include "ident/estimand.hpp"
#include "ident/prob_table.hpp"

namespace testing_support {

// Largest |a - b| over every assignment of the free variables of a and b.
// Variables with the same name must range over the same vertex.
inline double max_gap(const ident::Estimand& a, const ident::Estimand& b,
                      const ident::ProbTable& joint) {
  std::map<std::string, ident::Vertex> vars;
  for (const auto* e : {&a, &b})
    for (const auto& f : e->free) vars[f.variable] = f.vertex;
  std::vector<std::string> names;
  std::vector<int> cards;
  for (const auto& [n, v] : vars) {
    names.push_back(n);
    cards.push_back(joint.cardinality(v));
  }
  ident::Evaluator ea(joint), eb(joint);
  double worst = 0.0;
  ident::for_each_assignment(cards, [&](const std::vector<int>& x) {
    ident::Binding ba, bb;
    for (std::size_t i = 0; i < names.size(); ++i) {
      for (const auto& f : a.free)
        if (f.variable == names[i]) ba[names[i]] = x[i];
      for (const auto& f : b.free)
        if (f.variable == names[i]) bb[names[i]] = x[i];
    }
    worst = std::max(worst, std::abs(ea(a, ba) - eb(b, bb)));
  });
  return worst;
}

}  // namespace testing_support

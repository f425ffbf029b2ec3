#pragma once

#include <map>
#include <optional>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ident/graph.hpp"
#include "ident/prob_table.hpp"

namespace ident {

// A variable position inside a factor: the observed vertex it refers to and
// either the name of the variable supplying its value or a constant value.
struct Slot {
  Vertex vertex;
  std::variant<std::string, int> value;

  static Slot variable(Vertex vertex, std::string name) {
    return Slot{std::move(vertex), std::move(name)};
  }
  static Slot constant(Vertex vertex, int v) { return Slot{std::move(vertex), v}; }

  bool is_constant() const { return std::holds_alternative<int>(value); }
  const std::string& name() const { return std::get<std::string>(value); }
  int constant_value() const { return std::get<int>(value); }

  friend bool operator==(const Slot&, const Slot&) = default;
};

// Declares a variable ranging over the values of `vertex`.
struct Binder {
  std::string variable;
  Vertex vertex;

  friend bool operator==(const Binder&, const Binder&) = default;
};

enum class ExprKind { kFactor, kProduct, kQuotient, kSum, kMarginal };

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression node over the observed joint distribution. Nodes may
// be shared between several parents.
//
//   factor    p(targets | given), a conditional of the observed joint
//   product   n-ary product
//   quotient  numerator / denominator
//   sum       sum over freshly introduced index variables
//   marginal  sum of a sub-expression over some of its free variables
class Expr {
 public:
  static ExprPtr factor(std::vector<Slot> targets, std::vector<Slot> given = {});
  static ExprPtr product(std::vector<ExprPtr> operands);
  static ExprPtr quotient(ExprPtr numerator, ExprPtr denominator);
  static ExprPtr sum(std::vector<Binder> indices, ExprPtr body);
  static ExprPtr marginal(ExprPtr body, std::vector<Binder> over);

  ExprKind kind() const { return kind_; }
  const std::vector<Slot>& targets() const { return targets_; }
  const std::vector<Slot>& given() const { return given_; }
  // Product operands, or {numerator, denominator}, or {body}.
  const std::vector<ExprPtr>& operands() const { return operands_; }
  const ExprPtr& numerator() const { return operands_.at(0); }
  const ExprPtr& denominator() const { return operands_.at(1); }
  const ExprPtr& body() const { return operands_.at(0); }
  // Sum indices or marginalised variables.
  const std::vector<Binder>& binders() const { return binders_; }

 private:
  Expr() = default;

  ExprKind kind_ = ExprKind::kFactor;
  std::vector<Slot> targets_;
  std::vector<Slot> given_;
  std::vector<ExprPtr> operands_;
  std::vector<Binder> binders_;
};

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

// Variables referenced by factors below `e` and not bound inside it.
std::set<std::string> free_variables(const ExprPtr& e);

// An expression together with the variables left free at its root (query
// outcomes and treatment values, or a kernel's arguments).
struct Estimand {
  std::vector<Binder> free;
  ExprPtr root;

  friend bool operator==(const Estimand& a, const Estimand& b) {
    return a.free == b.free && structurally_equal(a.root, b.root);
  }
};

struct WellFormedness {
  bool ok = true;
  std::string path;  // location of the first violation
  std::string message;
  explicit operator bool() const { return ok; }
};

WellFormedness well_formed(const Estimand& e);

using Binding = std::map<std::string, int>;

// Exact evaluation against a dense joint. Sub-expression values are memoised
// per node and assignment of the node's free variables, so repeated calls on
// one evaluator (for example over all outcome values) share work.
class Evaluator {
 public:
  explicit Evaluator(const ProbTable& joint);

  double operator()(const Estimand& e, const Binding& binding);

  const ProbTable& joint() const { return joint_; }

 private:
  double eval(const ExprPtr& e);
  double eval_factor(const ExprPtr& node);
  const std::vector<std::string>& free_of(const Expr* e);
  const ProbTable& marginal_over(const std::vector<Vertex>& vertices);
  int value_of(const Slot& s) const;
  int card(const Vertex& v) const;

  const ProbTable& joint_;
  std::map<std::vector<Vertex>, ProbTable> marginals_;
  std::unordered_map<const Expr*, std::vector<std::string>> free_;
  std::map<std::pair<const Expr*, std::vector<int>>, double> memo_;
  std::unordered_map<std::string, int> env_;
  // Keep evaluated trees alive so memo keys stay unique.
  std::vector<ExprPtr> pinned_;
};

double evaluate(const Estimand& e, const ProbTable& joint,
                const Binding& binding);

// `sum_{m,c} (sum_{a'} p(Y|m,a',c) p(a'|c)) p(m|a,c) p(c)` style.
std::string render_text(const ExprPtr& e);
std::string render_text(const Estimand& e);
std::string render_latex(const Estimand& e);
// Complete LaTeX document displaying the estimand.
std::string latex_document(const Estimand& e);

inline constexpr int kExpressionSchemaVersion = 1;

nlohmann::json expression_to_json(const ExprPtr& e);
nlohmann::json to_json(const Estimand& e);
std::string to_json_text(const Estimand& e);
Estimand from_json(const nlohmann::json& j);
// Throws ParseError (with byte position for syntax errors).
Estimand from_json(const std::string& text);

}  // namespace ident

#include "ident/estimand.hpp"

#include <algorithm>
#include <functional>

#include "ident/error.hpp"

namespace ident {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Construction

ExprPtr Expr::factor(std::vector<Slot> targets, std::vector<Slot> given) {
  if (targets.empty()) throw InvalidInput("factor without target variables");
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::kFactor;
  e->targets_ = std::move(targets);
  e->given_ = std::move(given);
  return e;
}

ExprPtr Expr::product(std::vector<ExprPtr> operands) {
  if (operands.empty()) throw InvalidInput("empty product");
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::kProduct;
  e->operands_ = std::move(operands);
  return e;
}

ExprPtr Expr::quotient(ExprPtr numerator, ExprPtr denominator) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::kQuotient;
  e->operands_ = {std::move(numerator), std::move(denominator)};
  return e;
}

ExprPtr Expr::sum(std::vector<Binder> indices, ExprPtr body) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::kSum;
  e->binders_ = std::move(indices);
  e->operands_ = {std::move(body)};
  return e;
}

ExprPtr Expr::marginal(ExprPtr body, std::vector<Binder> over) {
  auto e = std::shared_ptr<Expr>(new Expr());
  e->kind_ = ExprKind::kMarginal;
  e->binders_ = std::move(over);
  e->operands_ = {std::move(body)};
  return e;
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind() != b->kind() || a->targets() != b->targets() ||
      a->given() != b->given() || a->binders() != b->binders() ||
      a->operands().size() != b->operands().size()) {
    return false;
  }
  for (std::size_t i = 0; i < a->operands().size(); ++i) {
    if (!structurally_equal(a->operands()[i], b->operands()[i])) return false;
  }
  return true;
}

std::set<std::string> free_variables(const ExprPtr& e) {
  std::set<std::string> out;
  switch (e->kind()) {
    case ExprKind::kFactor:
      for (const auto* slots : {&e->targets(), &e->given()}) {
        for (const auto& s : *slots) {
          if (!s.is_constant()) out.insert(s.name());
        }
      }
      break;
    case ExprKind::kProduct:
    case ExprKind::kQuotient:
      for (const auto& op : e->operands()) {
        auto f = free_variables(op);
        out.insert(f.begin(), f.end());
      }
      break;
    case ExprKind::kSum:
    case ExprKind::kMarginal:
      out = free_variables(e->body());
      for (const auto& b : e->binders()) out.erase(b.variable);
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Well-formedness

namespace {

const char* kind_name(ExprKind k) {
  switch (k) {
    case ExprKind::kFactor:
      return "factor";
    case ExprKind::kProduct:
      return "product";
    case ExprKind::kQuotient:
      return "quotient";
    case ExprKind::kSum:
      return "sum";
    case ExprKind::kMarginal:
      return "marginal";
  }
  return "?";
}

struct ScopeChecker {
  WellFormedness result;
  // variable name -> vertex, for everything currently in scope
  std::map<std::string, Vertex> scope;

  bool fail(const std::string& path, const std::string& msg) {
    if (result.ok) {
      result.ok = false;
      result.path = path;
      result.message = msg;
    }
    return false;
  }

  bool check(const ExprPtr& e, const std::string& path) {
    if (!e) return fail(path, "null expression");
    const std::string here = path + "/" + kind_name(e->kind());
    switch (e->kind()) {
      case ExprKind::kFactor: {
        if (e->targets().empty()) return fail(here, "factor has no targets");
        std::set<Vertex> seen;
        for (const auto* slots : {&e->targets(), &e->given()}) {
          for (const auto& s : *slots) {
            if (!seen.insert(s.vertex).second) {
              return fail(here, "vertex " + s.vertex + " appears twice");
            }
            if (s.is_constant()) {
              if (s.constant_value() < 0) {
                return fail(here, "negative constant for " + s.vertex);
              }
              continue;
            }
            auto it = scope.find(s.name());
            if (it == scope.end()) {
              return fail(here, "unbound variable " + s.name());
            }
            if (it->second != s.vertex) {
              return fail(here, "variable " + s.name() + " ranges over " +
                                    it->second + " but is used for " +
                                    s.vertex);
            }
          }
        }
        return true;
      }
      case ExprKind::kProduct:
      case ExprKind::kQuotient: {
        if (e->operands().empty()) return fail(here, "no operands");
        for (std::size_t i = 0; i < e->operands().size(); ++i) {
          if (!check(e->operands()[i], here + "[" + std::to_string(i) + "]")) {
            return false;
          }
        }
        return true;
      }
      case ExprKind::kSum:
      case ExprKind::kMarginal: {
        std::vector<std::string> added;
        bool ok = true;
        for (const auto& b : e->binders()) {
          if (b.variable.empty()) {
            ok = fail(here, "empty index name");
            break;
          }
          if (scope.count(b.variable)) {
            ok = fail(here, "variable " + b.variable + " bound twice");
            break;
          }
          scope.emplace(b.variable, b.vertex);
          added.push_back(b.variable);
        }
        if (ok) {
          auto used = free_variables(e->body());
          for (const auto& b : e->binders()) {
            if (!used.count(b.variable)) {
              ok = fail(here, "dangling index " + b.variable);
              break;
            }
          }
        }
        if (ok) ok = check(e->body(), here);
        for (const auto& v : added) scope.erase(v);
        return ok;
      }
    }
    return fail(here, "unknown node kind");
  }
};

}  // namespace

WellFormedness well_formed(const Estimand& e) {
  ScopeChecker checker;
  for (const auto& b : e.free) {
    if (b.variable.empty() || !checker.scope.emplace(b.variable, b.vertex).second) {
      checker.fail("root", "free variable '" + b.variable +
                               "' empty or declared twice");
      return checker.result;
    }
  }
  checker.check(e.root, "root");
  return checker.result;
}

// ---------------------------------------------------------------------------
// Evaluation

Evaluator::Evaluator(const ProbTable& joint) : joint_(joint) {}

int Evaluator::card(const Vertex& v) const {
  int p = joint_.position(v);
  if (p < 0) throw EvaluationError("vertex " + v + " not in the joint table");
  return joint_.cardinalities()[p];
}

const std::vector<std::string>& Evaluator::free_of(const Expr* e) {
  auto it = free_.find(e);
  if (it != free_.end()) return it->second;
  std::function<std::set<std::string>(const Expr*)> walk =
      [&](const Expr* n) -> std::set<std::string> {
    auto cached = free_.find(n);
    if (cached != free_.end()) {
      return {cached->second.begin(), cached->second.end()};
    }
    std::set<std::string> out;
    switch (n->kind()) {
      case ExprKind::kFactor:
        for (const auto* slots : {&n->targets(), &n->given()}) {
          for (const auto& s : *slots) {
            if (!s.is_constant()) out.insert(s.name());
          }
        }
        break;
      case ExprKind::kProduct:
      case ExprKind::kQuotient:
        for (const auto& op : n->operands()) {
          auto f = walk(op.get());
          out.insert(f.begin(), f.end());
        }
        break;
      case ExprKind::kSum:
      case ExprKind::kMarginal:
        out = walk(n->body().get());
        for (const auto& b : n->binders()) out.erase(b.variable);
        break;
    }
    free_[n] = std::vector<std::string>(out.begin(), out.end());
    return out;
  };
  walk(e);
  return free_.at(e);
}

const ProbTable& Evaluator::marginal_over(const std::vector<Vertex>& vertices) {
  auto it = marginals_.find(vertices);
  if (it != marginals_.end()) return it->second;
  return marginals_.emplace(vertices, joint_.marginal(vertices)).first->second;
}

int Evaluator::value_of(const Slot& s) const {
  int v;
  if (s.is_constant()) {
    v = s.constant_value();
  } else {
    auto it = env_.find(s.name());
    if (it == env_.end()) {
      throw EvaluationError("missing binding for variable " + s.name());
    }
    v = it->second;
  }
  if (v < 0 || v >= card(s.vertex)) {
    throw EvaluationError("value " + std::to_string(v) + " out of range for " +
                          s.vertex);
  }
  return v;
}

double Evaluator::eval_factor(const ExprPtr& node) {
  const Expr& e = *node;
  // Sorted vertex order keys the marginal cache.
  std::vector<std::pair<Vertex, int>> all, cond;
  for (const auto& s : e.targets()) all.emplace_back(s.vertex, value_of(s));
  for (const auto& s : e.given()) {
    int v = value_of(s);
    all.emplace_back(s.vertex, v);
    cond.emplace_back(s.vertex, v);
  }
  auto lookup = [&](std::vector<std::pair<Vertex, int>> items) {
    std::sort(items.begin(), items.end());
    std::vector<Vertex> names;
    std::vector<int> values;
    for (auto& [n, v] : items) {
      names.push_back(n);
      values.push_back(v);
    }
    const ProbTable& t = marginal_over(names);
    return t.values()[t.offset(values)];
  };
  double joint = lookup(all);
  if (cond.empty()) return joint;
  double denom = lookup(cond);
  if (denom <= 0.0) {
    throw EvaluationError("zero-probability conditioning event in " +
                          render_text(node));
  }
  return joint / denom;
}

double Evaluator::eval(const ExprPtr& e) {
  const auto& fv = free_of(e.get());
  std::vector<int> key;
  key.reserve(fv.size());
  for (const auto& v : fv) {
    auto it = env_.find(v);
    if (it == env_.end()) {
      throw EvaluationError("missing binding for variable " + v);
    }
    key.push_back(it->second);
  }
  auto memo_key = std::make_pair(e.get(), std::move(key));
  if (auto it = memo_.find(memo_key); it != memo_.end()) return it->second;

  double result = 0.0;
  switch (e->kind()) {
    case ExprKind::kFactor:
      result = eval_factor(e);
      break;
    case ExprKind::kProduct:
      result = 1.0;
      for (const auto& op : e->operands()) result *= eval(op);
      break;
    case ExprKind::kQuotient: {
      double num = eval(e->numerator());
      double den = eval(e->denominator());
      if (den == 0.0) {
        throw EvaluationError("zero denominator in " +
                              render_text(e->denominator()));
      }
      result = num / den;
      break;
    }
    case ExprKind::kSum:
    case ExprKind::kMarginal: {
      const auto& binders = e->binders();
      std::vector<int> cards;
      std::vector<std::optional<int>> saved;
      for (const auto& b : binders) {
        cards.push_back(card(b.vertex));
        auto it = env_.find(b.variable);
        saved.push_back(it == env_.end() ? std::nullopt
                                         : std::optional<int>(it->second));
      }
      for_each_assignment(cards, [&](const std::vector<int>& a) {
        for (std::size_t i = 0; i < binders.size(); ++i) {
          env_[binders[i].variable] = a[i];
        }
        result += eval(e->body());
      });
      for (std::size_t i = 0; i < binders.size(); ++i) {
        if (saved[i]) {
          env_[binders[i].variable] = *saved[i];
        } else {
          env_.erase(binders[i].variable);
        }
      }
      break;
    }
  }
  memo_.emplace(std::move(memo_key), result);
  return result;
}

double Evaluator::operator()(const Estimand& e, const Binding& binding) {
  if (pinned_.empty() || pinned_.back() != e.root) pinned_.push_back(e.root);
  env_.clear();
  for (const auto& b : e.free) {
    auto it = binding.find(b.variable);
    if (it == binding.end()) {
      throw EvaluationError("missing binding for variable " + b.variable);
    }
    if (it->second < 0 || it->second >= card(b.vertex)) {
      throw EvaluationError("value out of range for variable " + b.variable);
    }
    env_[b.variable] = it->second;
  }
  return eval(e.root);
}

double evaluate(const Estimand& e, const ProbTable& joint,
                const Binding& binding) {
  Evaluator ev(joint);
  return ev(e, binding);
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string slot_text(const Slot& s) {
  if (s.is_constant()) return s.vertex + "=" + std::to_string(s.constant_value());
  return s.name();
}

bool is_atomic(const ExprPtr& e) { return e->kind() == ExprKind::kFactor; }

std::string text(const ExprPtr& e);

std::string wrapped(const ExprPtr& e) {
  return is_atomic(e) ? text(e) : "(" + text(e) + ")";
}

std::string text(const ExprPtr& e) {
  switch (e->kind()) {
    case ExprKind::kFactor: {
      std::vector<std::string> t, g;
      for (const auto& s : e->targets()) t.push_back(slot_text(s));
      for (const auto& s : e->given()) g.push_back(slot_text(s));
      return "p(" + join(t, ",") + (g.empty() ? "" : "|" + join(g, ",")) + ")";
    }
    case ExprKind::kProduct: {
      std::vector<std::string> parts;
      for (const auto& op : e->operands()) parts.push_back(wrapped(op));
      return join(parts, " ");
    }
    case ExprKind::kQuotient:
      return wrapped(e->numerator()) + " / " + wrapped(e->denominator());
    case ExprKind::kSum:
    case ExprKind::kMarginal: {
      std::vector<std::string> names;
      for (const auto& b : e->binders()) names.push_back(b.variable);
      const auto& body = e->body();
      bool bare = body->kind() == ExprKind::kFactor ||
                  body->kind() == ExprKind::kProduct;
      return "sum_{" + join(names, ",") + "} " +
             (bare ? text(body) : "(" + text(body) + ")");
    }
  }
  return "";
}

std::string latex_name(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '_':
      case '#':
      case '$':
      case '%':
      case '&':
      case '{':
      case '}':
        out += '\\';
        out += c;
        break;
      case '^':
        out += "\\hat{}";
        break;
      case '~':
        out += "\\sim{}";
        break;
      case '\\':
        out += "\\backslash{}";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string latex_slot(const Slot& s) {
  if (s.is_constant()) {
    return latex_name(s.vertex) + "{=}" + std::to_string(s.constant_value());
  }
  return latex_name(s.name());
}

std::string latex(const ExprPtr& e);

std::string latex_wrapped(const ExprPtr& e) {
  return is_atomic(e) ? latex(e) : "\\left(" + latex(e) + "\\right)";
}

std::string latex(const ExprPtr& e) {
  switch (e->kind()) {
    case ExprKind::kFactor: {
      std::vector<std::string> t, g;
      for (const auto& s : e->targets()) t.push_back(latex_slot(s));
      for (const auto& s : e->given()) g.push_back(latex_slot(s));
      return "p(" + join(t, ", ") +
             (g.empty() ? "" : " \\mid " + join(g, ", ")) + ")";
    }
    case ExprKind::kProduct: {
      std::vector<std::string> parts;
      for (const auto& op : e->operands()) parts.push_back(latex_wrapped(op));
      return join(parts, " ");
    }
    case ExprKind::kQuotient:
      return "\\frac{" + latex(e->numerator()) + "}{" +
             latex(e->denominator()) + "}";
    case ExprKind::kSum:
    case ExprKind::kMarginal: {
      std::vector<std::string> names;
      for (const auto& b : e->binders()) names.push_back(latex_name(b.variable));
      const auto& body = e->body();
      bool bare = body->kind() == ExprKind::kFactor ||
                  body->kind() == ExprKind::kProduct;
      return "\\sum_{" + join(names, ", ") + "} " +
             (bare ? latex(body) : "\\left(" + latex(body) + "\\right)");
    }
  }
  return "";
}

}  // namespace

std::string render_text(const ExprPtr& e) { return text(e); }
std::string render_text(const Estimand& e) { return text(e.root); }
std::string render_latex(const Estimand& e) { return latex(e.root); }

std::string latex_document(const Estimand& e) {
  return "\\documentclass{article}\n"
         "\\usepackage{amsmath}\n"
         "\\begin{document}\n"
         "\\[\n" +
         render_latex(e) +
         "\n\\]\n"
         "\\end{document}\n";
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json slot_json(const Slot& s) {
  json j = {{"vertex", s.vertex}};
  if (s.is_constant()) {
    j["value"] = s.constant_value();
  } else {
    j["var"] = s.name();
  }
  return j;
}

json binder_json(const Binder& b) {
  return {{"var", b.variable}, {"vertex", b.vertex}};
}

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw ParseError("invalid expression JSON at " + path + ": " + msg, 0);
}

void only_keys(const json& j, const std::string& path,
               std::initializer_list<const char*> keys) {
  if (!j.is_object()) schema_error(path, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) schema_error(path, "unknown key '" + k + "'");
  }
}

const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) schema_error(path, std::string("missing '") + key + "'");
  return j.at(key);
}

std::string string_field(const json& j, const std::string& path,
                         const char* key) {
  const json& v = field(j, path, key);
  if (!v.is_string()) schema_error(path, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

Slot slot_from(const json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "slot must be an object");
  if (j.contains("var") == j.contains("value")) {
    schema_error(path, "slot needs exactly one of 'var' and 'value'");
  }
  if (j.contains("var")) {
    only_keys(j, path, {"vertex", "var"});
    return Slot::variable(string_field(j, path, "vertex"),
                          string_field(j, path, "var"));
  }
  only_keys(j, path, {"vertex", "value"});
  const json& v = j.at("value");
  if (!v.is_number_integer() || v.get<int>() < 0) {
    schema_error(path, "'value' must be a non-negative integer");
  }
  return Slot::constant(string_field(j, path, "vertex"), v.get<int>());
}

Binder binder_from(const json& j, const std::string& path) {
  only_keys(j, path, {"var", "vertex"});
  return Binder{string_field(j, path, "var"), string_field(j, path, "vertex")};
}

template <typename T, typename F>
std::vector<T> list_from(const json& j, const std::string& path, F&& item) {
  if (!j.is_array()) schema_error(path, "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(item(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

ExprPtr expr_from(const json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
  const std::string kind = string_field(j, path, "kind");
  if (kind == "factor") {
    only_keys(j, path, {"kind", "targets", "given"});
    auto targets = list_from<Slot>(field(j, path, "targets"), path + "/targets",
                                   slot_from);
    if (targets.empty()) schema_error(path, "factor without targets");
    auto given = j.contains("given")
                     ? list_from<Slot>(j.at("given"), path + "/given", slot_from)
                     : std::vector<Slot>{};
    return Expr::factor(std::move(targets), std::move(given));
  }
  if (kind == "product") {
    only_keys(j, path, {"kind", "operands"});
    auto ops = list_from<ExprPtr>(field(j, path, "operands"),
                                  path + "/operands", expr_from);
    if (ops.empty()) schema_error(path, "empty product");
    return Expr::product(std::move(ops));
  }
  if (kind == "quotient") {
    only_keys(j, path, {"kind", "numerator", "denominator"});
    return Expr::quotient(
        expr_from(field(j, path, "numerator"), path + "/numerator"),
        expr_from(field(j, path, "denominator"), path + "/denominator"));
  }
  if (kind == "sum") {
    only_keys(j, path, {"kind", "indices", "body"});
    return Expr::sum(list_from<Binder>(field(j, path, "indices"),
                                       path + "/indices", binder_from),
                     expr_from(field(j, path, "body"), path + "/body"));
  }
  if (kind == "marginal") {
    only_keys(j, path, {"kind", "over", "body"});
    return Expr::marginal(
        expr_from(field(j, path, "body"), path + "/body"),
        list_from<Binder>(field(j, path, "over"), path + "/over", binder_from));
  }
  schema_error(path, "unknown kind '" + kind + "'");
}

}  // namespace

json expression_to_json(const ExprPtr& e) {
  switch (e->kind()) {
    case ExprKind::kFactor: {
      json j = {{"kind", "factor"}, {"targets", json::array()}};
      for (const auto& s : e->targets()) j["targets"].push_back(slot_json(s));
      j["given"] = json::array();
      for (const auto& s : e->given()) j["given"].push_back(slot_json(s));
      return j;
    }
    case ExprKind::kProduct: {
      json j = {{"kind", "product"}, {"operands", json::array()}};
      for (const auto& op : e->operands()) {
        j["operands"].push_back(expression_to_json(op));
      }
      return j;
    }
    case ExprKind::kQuotient:
      return {{"kind", "quotient"},
              {"numerator", expression_to_json(e->numerator())},
              {"denominator", expression_to_json(e->denominator())}};
    case ExprKind::kSum:
    case ExprKind::kMarginal: {
      bool is_sum = e->kind() == ExprKind::kSum;
      json binders = json::array();
      for (const auto& b : e->binders()) binders.push_back(binder_json(b));
      return {{"kind", is_sum ? "sum" : "marginal"},
              {is_sum ? "indices" : "over", binders},
              {"body", expression_to_json(e->body())}};
    }
  }
  return nullptr;
}

json to_json(const Estimand& e) {
  json free = json::array();
  for (const auto& b : e.free) free.push_back(binder_json(b));
  return {{"schema_version", kExpressionSchemaVersion},
          {"free", free},
          {"expression", expression_to_json(e.root)}};
}

std::string to_json_text(const Estimand& e) { return to_json(e).dump(); }

Estimand from_json(const json& j) {
  only_keys(j, "$", {"schema_version", "free", "expression"});
  const json& version = field(j, "$", "schema_version");
  if (!version.is_number_integer() ||
      version.get<int>() != kExpressionSchemaVersion) {
    schema_error("$", "unsupported schema_version");
  }
  Estimand e;
  e.free = list_from<Binder>(field(j, "$", "free"), "$/free", binder_from);
  e.root = expr_from(field(j, "$", "expression"), "$/expression");
  return e;
}

Estimand from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("malformed expression JSON: ") + err.what(),
                     err.byte);
  }
  return from_json(j);
}

}  // namespace ident

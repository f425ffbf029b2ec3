// ident: command-line front end.
//
// Exit codes: 0 success, 1 query not identified, 2 usage or input error.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ident/error.hpp"
#include "ident/fixing.hpp"
#include "ident/graph.hpp"
#include "ident/graph_io.hpp"
#include "ident/identify.hpp"
#include "ident/oracle.hpp"

namespace {

using namespace ident;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kNotIdentified = 1;
constexpr int kUsage = 2;

VertexSet parse_list(const std::string& text, const char* flag) {
  VertexSet out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) {
      throw InvalidInput(std::string("empty vertex name in ") + flag);
    }
    out.insert(item.substr(b, e - b + 1));
  }
  if (!text.empty() && text.back() == ',') {
    throw InvalidInput(std::string("empty vertex name in ") + flag);
  }
  return out;
}

std::vector<Vertex> parse_sequence(const std::string& text) {
  std::vector<Vertex> out;
  for (std::size_t start = 0;;) {
    auto comma = text.find(',', start);
    std::string item = text.substr(start, comma - start);
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw InvalidInput("empty vertex name in --sequence");
    out.push_back(item.substr(b, e - b + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Loads a graph and projects out hidden vertices, with a notice.
MixedGraph load_admg(const std::string& path) {
  MixedGraph g = load_graph(path);
  if (!g.hidden().empty()) {
    std::cerr << "note: projecting out hidden vertices " << to_string(g.hidden())
              << "\n";
    g = latent_project(g);
  }
  return g;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("IDENT_SEED");
  if (!env || !*env) return 0;
  std::string s(env);
  if (s.find_first_not_of("0123456789") != std::string::npos || s.size() > 20) {
    throw InvalidInput("IDENT_SEED must be a non-negative integer");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw InvalidInput("IDENT_SEED out of range");
  }
}

json vertex_list(const VertexSet& s) { return json(std::vector<Vertex>(s.begin(), s.end())); }

void explain_failure(const NotIdentified& n) {
  std::cerr << "not identified: district " << to_string(n.failing_district)
            << " is not intrinsic; its reachable closure is "
            << to_string(n.closure) << ". Hedge roots "
            << to_string(n.witness.inner.roots) << ".\n";
}

int cmd_project(const std::string& path) {
  MixedGraph g = load_graph(path);
  // Nothing to project: echo in canonical form, whatever the edge kinds.
  std::cout << canonical_graph_json(g.hidden().empty() ? g : latent_project(g));
  return kOk;
}

int cmd_identify(const std::string& path, const std::string& treatment,
                 const std::string& outcome, const std::string& format,
                 bool standalone) {
  MixedGraph g = load_admg(path);
  Query q = Query::make(parse_list(outcome, "--outcome"),
                        parse_list(treatment, "--treatment"));
  IdentificationResult r = identify(g, q);
  if (const auto* n = std::get_if<NotIdentified>(&r)) {
    if (format == "json") {
      std::cout << result_to_json(r).dump(2) << "\n";
    } else {
      std::cout << witness_to_json(n->witness).dump(2) << "\n";
    }
    explain_failure(*n);
    return kNotIdentified;
  }
  const auto& id = std::get<Identified>(r);
  if (format == "text") {
    std::cout << render_text(id.estimand) << "\n";
  } else if (format == "latex") {
    std::cout << (standalone ? latex_document(id.estimand)
                             : render_latex(id.estimand) + "\n");
  } else if (format == "json") {
    std::cout << result_to_json(r).dump(2) << "\n";
  } else {
    std::cout << graph_to_dot(g);
  }
  return kOk;
}

int cmd_districts(const std::string& path) {
  MixedGraph g = load_admg(path);
  json out = json::array();
  for (const auto& d : districts(g)) out.push_back(vertex_list(d));
  std::cout << json{{"districts", out}}.dump(2) << "\n";
  return kOk;
}

int cmd_fix(const std::string& path, const std::string& sequence) {
  MixedGraph g = load_admg(path);
  FixingSequence seq{parse_sequence(sequence)};
  std::cout << canonical_graph_json(fix_all(g, seq));
  return kOk;
}

int cmd_closure(const std::string& path, const std::string& set) {
  MixedGraph g = load_admg(path);
  VertexSet s = parse_list(set, "--set");
  g.require_vertices(s);
  VertexSet closure = reachable_closure(g, s);
  json out = {{"set", vertex_list(s)},
              {"closure", vertex_list(closure)},
              {"reachable", closure == s},
              {"intrinsic", is_intrinsic(g, s)}};
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_verify(const std::string& path, const std::string& treatment,
               const std::string& outcome, int trials, std::uint64_t seed,
               double tol, int cardinality) {
  MixedGraph dag = load_graph(path);
  if (!dag.bidirected_edges().empty() || !dag.fixed().empty()) {
    throw InvalidInput(
        "verify needs a hidden-variable DAG: ground truth cannot be simulated "
        "from bidirected edges alone");
  }
  if (trials < 0) throw InvalidInput("--trials must be non-negative");
  if (cardinality < 2) throw InvalidInput("--cardinality must be at least 2");
  MixedGraph admg = latent_project(dag);
  Query q = Query::make(parse_list(outcome, "--outcome"),
                        parse_list(treatment, "--treatment"));
  IdentificationResult r = identify(admg, q);
  if (const auto* n = std::get_if<NotIdentified>(&r)) {
    std::cerr << "not identified; nothing to verify\n";
    std::cout << witness_to_json(n->witness).dump(2) << "\n";
    return kNotIdentified;
  }
  double worst = 0.0;
  std::size_t points = 0;
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    DiscreteScm scm = random_scm(dag, cardinality, seed + static_cast<std::uint64_t>(t));
    VerificationReport rep = verify(scm, admg, q, r, tol);
    worst = std::max(worst, rep.max_deviation);
    points += rep.points;
    if (!rep.passed) ++failures;
  }
  json out = {{"trials", trials},      {"seed", seed},
              {"tol", tol},            {"points", points},
              {"max_deviation", worst}, {"failures", failures},
              {"passed", failures == 0}};
  std::cout << out.dump(2) << "\n";
  return failures == 0 ? kOk : kNotIdentified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal effect identification over ADMGs"};
  app.require_subcommand(1, 1);

  std::string graph_path, treatment, outcome, format = "text", sequence, set;
  int trials = 100, cardinality = 2;
  std::uint64_t seed = 0;
  double tol = 1e-9;
  bool standalone = false;

  auto* project = app.add_subcommand("project", "Latent projection of a hidden-variable DAG");
  project->add_option("graph", graph_path, "Graph JSON file")->required();

  auto* identify_cmd = app.add_subcommand("identify", "Identify p(Y | do(a))");
  identify_cmd->add_option("graph", graph_path, "Graph JSON file")->required();
  identify_cmd->add_option("--treatment", treatment, "Comma-separated treatments")->required();
  identify_cmd->add_option("--outcome", outcome, "Comma-separated outcomes")->required();
  identify_cmd->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"text", "latex", "json", "dot"}));
  identify_cmd->add_flag("--standalone", standalone, "Full LaTeX document");

  auto* districts_cmd = app.add_subcommand("districts", "Districts of an ADMG");
  districts_cmd->add_option("graph", graph_path, "Graph JSON file")->required();

  auto* fix_cmd = app.add_subcommand("fix", "Replay a fixing sequence");
  fix_cmd->add_option("graph", graph_path, "Graph JSON file")->required();
  fix_cmd->add_option("--sequence", sequence, "Comma-separated vertices")->required();

  auto* closure_cmd = app.add_subcommand("closure", "Reachable closure of a set");
  closure_cmd->add_option("graph", graph_path, "Graph JSON file")->required();
  closure_cmd->add_option("--set", set, "Comma-separated vertices")->required();

  auto* verify_cmd = app.add_subcommand("verify", "Check an estimand against random SCMs");
  verify_cmd->add_option("graph", graph_path, "Hidden-variable DAG JSON file")->required();
  verify_cmd->add_option("--treatment", treatment, "Comma-separated treatments")->required();
  verify_cmd->add_option("--outcome", outcome, "Comma-separated outcomes")->required();
  verify_cmd->add_option("--trials", trials, "Number of random SCMs");
  auto* seed_opt = verify_cmd->add_option("--seed", seed, "First seed (default $IDENT_SEED or 0)");
  verify_cmd->add_option("--tol", tol, "Absolute tolerance");
  verify_cmd->add_option("--cardinality", cardinality, "States per variable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*project) return cmd_project(graph_path);
    if (*identify_cmd) {
      return cmd_identify(graph_path, treatment, outcome, format, standalone);
    }
    if (*districts_cmd) return cmd_districts(graph_path);
    if (*fix_cmd) return cmd_fix(graph_path, sequence);
    if (*closure_cmd) return cmd_closure(graph_path, set);
    if (*verify_cmd) {
      if (seed_opt->count() == 0) seed = default_seed();
      return cmd_verify(graph_path, treatment, outcome, trials, seed, tol,
                        cardinality);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

#include "doctest.h"

#include "ident/error.hpp"
#include "ident/graph_io.hpp"
#include "ident/identify.hpp"
#include "ident/oracle.hpp"
#include "support/brute_force.hpp"
#include "support/numeric.hpp"
#include "support/example_estimands.hpp"
#include "support/example_graphs.hpp"
#include "support/random_graphs.hpp"

using namespace ident;
using namespace testing_support;

namespace {

// Observed joint of a random SCM whose projection is g.
ProbTable compatible_joint(const MixedGraph& g, std::uint64_t seed, int card = 2) {
  return observed_joint(random_scm(canonical_dag(g), card, seed));
}

const Identified& identified(const IdentificationResult& r) {
  REQUIRE(std::holds_alternative<Identified>(r));
  return std::get<Identified>(r);
}

const NotIdentified& not_identified(const IdentificationResult& r) {
  REQUIRE(std::holds_alternative<NotIdentified>(r));
  return std::get<NotIdentified>(r);
}

}  // namespace

TEST_CASE("query validation") {
  auto g = fig1d();
  CHECK_THROWS_AS(identify(g, Query::make({"A"}, {"A"})), InvalidQuery);
  try {
    identify(g, Query::make({"A"}, {"A"}));
  } catch (const InvalidQuery& e) {
    CHECK(std::string(e.what()).find("outcome intersects treatment") != std::string::npos);
  }
  CHECK_THROWS_AS(identify(g, Query::make({"Q"}, {"A"})), UnknownVertex);
  CHECK_THROWS_AS(identify(g, Query::make({}, {"A"})), InvalidQuery);
  CHECK_THROWS_AS(identify(fig1b(), Query::make({"Y"}, {"A1"})), InvalidInput);
  auto q = Query::make({"Y"}, {"A"});
  q.treatment_values["A"] = "Y";  // collides with the outcome variable
  CHECK_THROWS_AS(identify(g, q), InvalidQuery);
}

TEST_CASE("treatment labels") {
  auto q = Query::make({"Y"}, {"A1", "A2"});
  CHECK(q.treatment_values.at("A1") == "a1");
  CHECK(q.treatment_values.at("A2") == "a2");
  // lower-casing collides with the outcome name
  auto clash = Query::make({"a"}, {"A"});
  CHECK(clash.treatment_values.at("A") == "a'");
}

TEST_CASE("decomposition of the front-door query") {
  auto d = decompose(fig1d(), Query::make({"Y"}, {"A"}));
  CHECK(d.y_star == VertexSet{"C", "M", "Y"});
  REQUIRE(d.districts.size() == 3);
  std::map<VertexSet, VertexSet> ctx;
  for (const auto& dc : d.districts) ctx[dc.district] = dc.context;
  CHECK(ctx.at({"Y"}) == VertexSet{"C", "M"});
  CHECK(ctx.at({"M"}) == VertexSet{"A", "C"});
  CHECK(ctx.at({"C"}).empty());
  CHECK(d.variable.at("A") == "a");
  CHECK(d.variable.at("Y") == "Y");
  CHECK(d.variable.at("M") == "m");
  CHECK(d.variable.at("C") == "c");
}

TEST_CASE("decomposition of the joint-treatment query") {
  auto d = decompose(fig1c(), Query::make({"Y"}, {"A1", "A2"}));
  CHECK(d.y_star == VertexSet{"Y"});
  REQUIRE(d.districts.size() == 1);
  CHECK(d.districts[0].district == VertexSet{"Y"});
  CHECK(d.districts[0].context == VertexSet{"A1", "A2"});
  CHECK(d.indices.empty());
}

TEST_CASE("decomposition without treatments") {
  auto g = fig1d();
  auto d = decompose(g, Query::make({"Y"}, {}));
  CHECK(d.y_star == ancestors(g, {"Y"}));
  std::vector<VertexSet> blocks;
  for (const auto& dc : d.districts) blocks.push_back(dc.district);
  CHECK(blocks == districts(induced_subgraph(g, d.y_star)));
  // p(Y | do()) is p(Y)
  auto r = identify(g, Query::make({"Y"}, {}));
  auto joint = compatible_joint(g, 3);
  Estimand py{{{"Y", "Y"}}, Expr::factor({v("Y", "Y")})};
  CHECK(max_gap(identified(r).estimand, py, joint) < 1e-12);
}

TEST_CASE("front-door district kernels") {
  auto g = fig1d();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto joint = compatible_joint(g, seed, seed % 2 ? 3 : 2);
    auto kc = identify_district(g, {"C"});
    auto km = identify_district(g, {"M"});
    auto ky = identify_district(g, {"Y"});
    REQUIRE(std::holds_alternative<Estimand>(kc));
    REQUIRE(std::holds_alternative<Estimand>(km));
    REQUIRE(std::holds_alternative<Estimand>(ky));
    CHECK(max_gap(std::get<Estimand>(kc), kernel_c_formula(), joint) < 1e-12);
    CHECK(max_gap(std::get<Estimand>(km), kernel_m_formula(), joint) < 1e-12);
    CHECK(max_gap(std::get<Estimand>(ky), kernel_y_formula(), joint) < 1e-12);
  }
  auto stuck = identify_district(fig1c(), {"W", "Y"});
  REQUIRE(std::holds_alternative<NotReachable>(stuck));
  CHECK(std::get<NotReachable>(stuck).residual == VertexSet{"A2"});
  CHECK_THROWS_AS(identify_district(g, {"C", "M"}), PreconditionViolation);
}

TEST_CASE("reference formulas") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = identify(fig1d(), Query::make({"Y"}, {"A"}));
    CHECK(max_gap(identified(r).estimand, front_door_formula(), compatible_joint(fig1d(), seed)) <
          1e-12);
    auto rc = identify(fig1c(), Query::make({"Y"}, {"A1", "A2"}));
    CHECK(max_gap(identified(rc).estimand, ratio_formula(), compatible_joint(fig1c(), seed)) <
          1e-12);
    auto ra = identify(fig1a(), Query::make({"Y"}, {"A1", "A2"}));
    CHECK(max_gap(identified(ra).estimand, g_formula_fig1a(), compatible_joint(fig1a(), seed)) <
          1e-12);
  }
}

TEST_CASE("identified estimands are well formed and range over the query") {
  auto r = identify(fig1d(), Query::make({"Y"}, {"A"}));
  const auto& id = identified(r);
  CHECK(well_formed(id.estimand));
  CHECK(id.estimand.free == std::vector<Binder>{{"Y", "Y"}, {"a", "A"}});
  CHECK(id.y_star == VertexSet{"C", "M", "Y"});
  CHECK(id.districts.size() == 3);
  for (const auto& d : id.districts) {
    CHECK(is_intrinsic(fig1d(), d.district));
    CHECK(well_formed(d.kernel));
  }
  auto text = render_text(id.estimand);
  CHECK(text.find("a'") != std::string::npos);
  CHECK(from_json(to_json_text(id.estimand)) == id.estimand);
}

TEST_CASE("hedge for the single-treatment query") {
  auto g = fig1c();
  auto q = Query::make({"Y"}, {"A2"});
  auto r = identify(g, q);
  const auto& n = not_identified(r);
  CHECK(n.failing_district == VertexSet{"W", "Y"});
  CHECK(n.closure == VertexSet{"A2", "W", "Y"});
  CHECK(n.y_star == VertexSet{"A1", "W", "Y"});
  CHECK(n.witness.inner.vertices == VertexSet{"W", "Y"});
  CHECK(n.witness.outer.vertices == VertexSet{"A2", "W", "Y"});
  // Neither W nor Y has a child inside {W, Y}.
  CHECK(n.witness.inner.roots == VertexSet{"W", "Y"});
  CHECK(n.witness.outer.roots == n.witness.inner.roots);
  CHECK(n.witness.inner.witness_edges.empty());
  CHECK(n.witness.outer.witness_edges == std::set<Edge>{{"A2", "Y"}});
  CHECK(is_hedge(g, q, n.witness));

  // With roots {Y} alone, W cannot reach a root inside {W, Y}.
  HedgeWitness y_rooted = n.witness;
  y_rooted.inner.roots = y_rooted.outer.roots = {"Y"};
  auto check = is_hedge(g, q, y_rooted);
  CHECK_FALSE(check);
  CHECK(check.defect == HedgeDefect::kVertexMissesRoot);
}

TEST_CASE("identifying a superset of treatments does not imply identifying a subset") {
  auto g = fig1c();
  auto full = Query::make({"Y"}, {"A1", "A2"});
  auto sub = Query::make({"Y"}, {"A2"});
  CHECK(is_identified(identify(g, full)));
  auto fc = failure_characterizations(g, sub);
  CHECK(fc.hedge_exists);
  CHECK(fc.some_district_not_intrinsic);
  CHECK(fc.some_district_proper_closure);
  REQUIRE(fc.witness.has_value());
  CHECK(is_hedge(g, sub, *fc.witness));
  auto none = failure_characterizations(g, full);
  CHECK_FALSE(none.hedge_exists);
  CHECK_FALSE(none.some_district_not_intrinsic);
  CHECK_FALSE(none.some_district_proper_closure);
}

TEST_CASE("front-door has no failure characterization") {
  auto fc = failure_characterizations(fig1d(), Query::make({"Y"}, {"A"}));
  CHECK_FALSE(fc.hedge_exists);
  CHECK_FALSE(fc.some_district_not_intrinsic);
  CHECK_FALSE(fc.some_district_proper_closure);
  CHECK_FALSE(fc.witness.has_value());
}

TEST_CASE("hedge checker rejects broken candidates") {
  auto g = fig1c();
  auto q = Query::make({"Y"}, {"A2"});
  auto w = find_hedge(g, q, {"W", "Y"});
  REQUIRE(is_hedge(g, q, w));

  auto same = w;
  same.outer = same.inner;
  CHECK(is_hedge(g, q, same).defect == HedgeDefect::kNotStrictSubset);

  auto no_roots = w;
  no_roots.inner.roots = no_roots.outer.roots = {};
  CHECK(is_hedge(g, q, no_roots).defect == HedgeDefect::kEmptyRoots);

  auto foreign = w;
  foreign.outer.witness_edges.insert({"A1", "Y"});
  CHECK(is_hedge(g, q, foreign).defect == HedgeDefect::kForeignWitnessEdge);

  auto split = w;
  split.inner.vertices = {"A1", "Y"};
  split.inner.roots = split.outer.roots = {"Y"};
  CHECK(is_hedge(g, q, split).defect == HedgeDefect::kNotBidirectedConnected);

  auto treated = Query::make({"Y"}, {"A2", "W"});
  CHECK(is_hedge(g, treated, w).defect == HedgeDefect::kInnerMeetsTreatment);

  auto untreated = Query::make({"Y"}, {"A1"});
  CHECK(is_hedge(g, untreated, w).defect == HedgeDefect::kNoTreatmentInDifference);

  // W reaches Y only through A1.
  CHECK(is_hedge(g, Query::make({"Y"}, {"A1", "A2"}), w).defect ==
        HedgeDefect::kRootNotAncestorOfOutcome);

  auto unknown = w;
  unknown.outer.vertices.insert("Q");
  CHECK(is_hedge(g, q, unknown).defect == HedgeDefect::kUnknownVertex);

  auto stray_root = w;
  stray_root.inner.roots = stray_root.outer.roots = {"A2"};
  CHECK(is_hedge(g, q, stray_root).defect == HedgeDefect::kRootsOutsideForest);

  CHECK_THROWS_AS(find_hedge(fig1d(), Query::make({"Y"}, {"A"}), {"Y"}), PreconditionViolation);
}

TEST_CASE("failure characterizations agree with identify on random instances") {
  Rng rng(31337);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    auto g = random_admg(rng, uniform_int(rng, 2, 6), 0.35, 0.35);
    auto q = random_query(rng, g);
    auto r = identify(g, q);
    auto fc = failure_characterizations(g, q);
    INFO(canonical_graph_json(g));
    CHECK(fc.hedge_exists == fc.some_district_not_intrinsic);
    CHECK(fc.some_district_not_intrinsic == fc.some_district_proper_closure);
    CHECK(fc.hedge_exists == !is_identified(r));
    if (const auto* n = std::get_if<NotIdentified>(&r)) {
      ++failures;
      CHECK(is_hedge(g, q, n->witness));
      REQUIRE(fc.witness.has_value());
      CHECK(is_hedge(g, q, *fc.witness));
      CHECK_FALSE(is_intrinsic(g, n->failing_district));
      CHECK(n->closure == reachable_closure(g, n->failing_district));
      CHECK(n->failing_district == n->failing_districts.front());
      CHECK(std::is_sorted(n->failing_districts.begin(), n->failing_districts.end()));
    } else {
      for (const auto& d : std::get<Identified>(r).districts) CHECK(is_intrinsic(g, d.district));
    }
  }
  CHECK(failures > 100);
  CHECK(failures < 900);
}

TEST_CASE("identified estimands normalise over outcomes") {
  Rng rng(77);
  int checked = 0;
  for (int i = 0; i < 150; ++i) {
    auto g = random_admg(rng, uniform_int(rng, 2, 5), 0.4, 0.3);
    auto q = random_query(rng, g);
    auto r = identify(g, q);
    if (!is_identified(r)) continue;
    ++checked;
    const auto& e = std::get<Identified>(r).estimand;
    auto joint = compatible_joint(g, i);
    std::vector<int> a_cards(q.treatments.size(), 2), y_cards(q.outcomes.size(), 2);
    Evaluator ev(joint);
    for_each_assignment(a_cards, [&](const std::vector<int>& a) {
      Binding b;
      std::size_t k = 0;
      for (const auto& t : q.treatments) b[q.treatment_values.at(t)] = a[k++];
      double total = 0.0;
      for_each_assignment(y_cards, [&](const std::vector<int>& y) {
        std::size_t j = 0;
        for (const auto& o : q.outcomes) b[o] = y[j++];
        total += ev(e, b);
      });
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    });
  }
  CHECK(checked > 40);
}

TEST_CASE("without bidirected edges the estimand is the g-formula") {
  Rng rng(88);
  for (int i = 0; i < 100; ++i) {
    auto g = random_admg(rng, uniform_int(rng, 2, 5), 0.45, 0.0);
    auto q = random_query(rng, g);
    auto r = identify(g, q);
    REQUIRE(is_identified(r));
    auto joint = compatible_joint(g, i);
    std::vector<Vertex> rest;
    for (const auto& x : g.random())
      if (!q.treatments.count(x) && !q.outcomes.count(x)) rest.push_back(x);
    std::vector<int> a_cards(q.treatments.size(), 2), y_cards(q.outcomes.size(), 2),
        r_cards(rest.size(), 2);
    Evaluator ev(joint);
    for_each_assignment(a_cards, [&](const std::vector<int>& a) {
      for_each_assignment(y_cards, [&](const std::vector<int>& y) {
        std::map<Vertex, int> fixed_values;
        Binding b;
        std::size_t k = 0;
        for (const auto& t : q.treatments) {
          fixed_values[t] = a[k];
          b[q.treatment_values.at(t)] = a[k++];
        }
        k = 0;
        for (const auto& o : q.outcomes) {
          fixed_values[o] = y[k];
          b[o] = y[k++];
        }
        // Truncated factorisation straight from the joint.
        double want = 0.0;
        for_each_assignment(r_cards, [&](const std::vector<int>& x) {
          auto all = fixed_values;
          for (std::size_t j = 0; j < rest.size(); ++j) all[rest[j]] = x[j];
          double term = 1.0;
          for (const auto& vtx : g.random()) {
            if (q.treatments.count(vtx)) continue;
            std::map<Vertex, int> pa;
            for (const auto& p : g.parents_of(vtx)) pa[p] = all[p];
            term *= bf_conditional(joint, {{vtx, all[vtx]}}, pa);
          }
          want += term;
        });
        CHECK(ev(std::get<Identified>(r).estimand, b) == doctest::Approx(want).epsilon(1e-9));
      });
    });
  }
}

TEST_CASE("collider blanket conditioning agrees with the kernel's conditioning set") {
  struct Case {
    MixedGraph g;
    Query q;
  };
  std::vector<Case> cases = {{fig1d(), Query::make({"Y"}, {"A"})},
                             {fig1c(), Query::make({"Y"}, {"A1", "A2"})},
                             {fig1a(), Query::make({"Y"}, {"A1", "A2"})}};
  int steps = 0;
  for (const auto& c : cases) {
    auto r = identify(c.g, c.q);
    for (const auto& d : identified(r).districts) {
      std::vector<KernelStep> trace;
      synthesize_kernel(c.g, d.sequence, &trace);
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto joint = compatible_joint(c.g, seed);
        for (const auto& step : trace) {
          VertexSet mb = collider_blanket(step.graph, step.vertex);
          auto by_t = kernel_conditional(step.kernel, step.graph.random(), step.vertex,
                                         step.conditioning);
          auto by_mb = kernel_conditional(step.kernel, step.graph.random(), step.vertex, mb);
          INFO("district " << to_string(d.district) << " step " << step.vertex);
          CHECK(max_gap(by_t, by_mb, joint) < 1e-12);
          ++steps;
        }
      }
    }
  }
  CHECK(steps > 20);
}

TEST_CASE("literal collider readings without the ancestral restriction disagree") {
  // In the front-door district {Y}, C is fixed while Y and M are still random
  // descendants; counting them into the blanket changes the conditional.
  auto g = fig1d();
  auto seq = std::get<FixingSequence>(find_valid_sequence(g, {"A", "C", "M"}));
  std::vector<KernelStep> trace;
  synthesize_kernel(g, seq, &trace);
  REQUIRE(trace.front().vertex == "C");
  const auto& step = trace.front();
  auto joint = compatible_joint(g, 1);
  auto by_t = kernel_conditional(step.kernel, step.graph.random(), "C", step.conditioning);
  for (auto reading : {ColliderPathReading::kSingleEdgeCounts,
                       ColliderPathReading::kLengthTwoOrMore}) {
    VertexSet mb = collider_blanket(step.graph, "C", {reading, false});
    auto by_mb = kernel_conditional(step.kernel, step.graph.random(), "C", mb);
    CHECK(max_gap(by_t, by_mb, joint) > 1e-6);
  }
}

TEST_CASE("hidden DAGs with a shared projection identify alike") {
  Rng rng(55);
  for (int i = 0; i < 100; ++i) {
    auto dag = random_hidden_dag(rng, uniform_int(rng, 2, 5), uniform_int(rng, 1, 3), 0.35);
    auto admg = latent_project(dag);
    auto twin = canonical_dag(admg);
    REQUIRE(latent_project(twin) == admg);
    auto q = random_query(rng, admg);
    auto r1 = identify(admg, q);
    auto r2 = identify(latent_project(twin), q);
    CHECK(result_to_json(r1) == result_to_json(r2));
  }
}

TEST_CASE("result JSON") {
  auto ok = result_to_json(identify(fig1d(), Query::make({"Y"}, {"A"})));
  CHECK(ok.at("status") == "identified");
  CHECK(from_json(ok.at("estimand")) ==
        std::get<Identified>(identify(fig1d(), Query::make({"Y"}, {"A"}))).estimand);
  CHECK(ok.at("districts").size() == 3);
  auto bad = result_to_json(identify(fig1c(), Query::make({"Y"}, {"A2"})));
  CHECK(bad.at("status") == "not_identified");
  CHECK(bad.at("witness").at("inner") == nlohmann::json({"W", "Y"}));
  CHECK(bad.at("witness").at("outer") == nlohmann::json({"A2", "W", "Y"}));
  CHECK(bad.at("witness").at("roots") == nlohmann::json({"W", "Y"}));
}

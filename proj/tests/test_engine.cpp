#include <chrono>
#include <random>
#include <set>

#include "doctest.h"
#include "gtea/corpus.hpp"
#include "gtea/engine.hpp"
#include "gtea/oracle.hpp"
#include "support.hpp"

using namespace gtea;

namespace {

Query with_outputs(const Query& q, std::set<std::string> outs) {
  std::vector<QueryNode> nodes = q.nodes();
  for (auto& n : nodes) n.output = outs.count(n.id) > 0;
  return Query(std::move(nodes));
}

std::vector<std::string> mat(const DataGraph& g, const CandidateMap& c, const Query& q, const char* id) {
  return names(g, c[q.index_of(id)]);
}

struct Example {
  DataGraph g = load_graph(fixture("running_graph.json"));
  Query q = Query::load(fixture("running_query.json"));
  ReachIndex idx = ReachIndex::build(g);
};

}  // namespace

TEST_SUITE("gtea_engine") {
  TEST_CASE("running example answers") {
    Example ex;
    const auto start = std::chrono::steady_clock::now();
    ResultSet rs = evaluate(ex.g, ex.idx, ex.q);
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(1));
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& row : rs.rows) got.emplace(ex.g.id(row[0]), ex.g.id(row[1]));
    const std::set<std::pair<std::string, std::string>> want{
        {"v3", "v11"}, {"v3", "v12"}, {"v3", "v14"}, {"v8", "v12"}, {"v8", "v14"}};
    CHECK(got == want);
    CHECK(rs.size() == 5);
  }

  TEST_CASE("pruning rounds on the running example") {
    Example ex;
    EngineStats st;
    CandidateMap c = prune_downward(ex.idx, ex.g, ex.q, initial_candidates(ex.g, ex.q), &st);
    CHECK(mat(ex.g, c, ex.q, "u2") == std::vector<std::string>{"v3", "v8"});
    CHECK(mat(ex.g, c, ex.q, "u3") == std::vector<std::string>{"v3", "v5"});
    CHECK(mat(ex.g, c, ex.q, "u5") == std::vector<std::string>{"v13"});
    CHECK(st.max_lout_per_node <= 1);

    Query q23 = with_outputs(ex.q, {"u2", "u3"});
    const auto prime = prime_subtree(q23, c);
    CHECK(std::set<int>(prime.begin(), prime.end()) ==
          std::set<int>{q23.index_of("u1"), q23.index_of("u2"), q23.index_of("u3")});
    CandidateMap up = prune_upward(ex.idx, ex.g, q23, prime, c, &st);
    CHECK(up == c);
    CHECK(st.max_lin_per_parent <= 1);
  }

  TEST_CASE("shrunk prime subtree") {
    Example ex;
    CandidateMap c = prune_downward(ex.idx, ex.g, ex.q, initial_candidates(ex.g, ex.q));
    const auto tree = output_paths(ex.q);
    c = prune_upward(ex.idx, ex.g, ex.q, tree, c);
    ShrunkPlan plan = shrink_prime(ex.q, tree, c);
    REQUIRE(plan.components.size() == 1);
    CHECK(plan.components[0] == std::vector<int>{ex.q.index_of("u2"), ex.q.index_of("u4")});
    CHECK(plan.fixed.empty());

    Query q5 = with_outputs(ex.q, {"u2", "u4", "u5"});
    ShrunkPlan p5 = shrink_prime(q5, output_paths(q5), c);
    CHECK(p5.components == plan.components);
    REQUIRE(p5.fixed.size() == 1);
    CHECK(p5.fixed[0].first == q5.index_of("u5"));
    CHECK(ex.g.id(p5.fixed[0].second) == "v13");
    ResultSet rs = evaluate(ex.g, ex.idx, q5);
    CHECK(rs.size() == 5);
    for (const auto& row : rs.rows) CHECK(ex.g.id(row[2]) == "v13");
  }

  TEST_CASE("branch lists of the maximal matching graph") {
    Example ex;
    Query q = with_outputs(ex.q, {"u2", "u3", "u4"});
    CandidateMap c = prune_downward(ex.idx, ex.g, q, initial_candidates(ex.g, q));
    c = prune_upward(ex.idx, ex.g, q, output_paths(q), c);
    const int u1 = q.index_of("u1"), u2 = q.index_of("u2"), u3 = q.index_of("u3"), u4 = q.index_of("u4");
    ShrunkPlan plan;
    plan.components = {{u1, u2, u3, u4}};
    for (bool pairwise : {false, true}) {
      MatchingGraph mg = build_matching_graph(ex.idx, ex.g, q, plan, c, pairwise);
      const auto at = std::find(c[u1].begin(), c[u1].end(), ex.g.at("v1"));
      REQUIRE(at != c[u1].end());
      const auto i = static_cast<std::size_t>(at - c[u1].begin());
      REQUIRE(mg.kids[u1] == std::vector<int>{u2, u3});
      auto targets = [&](int k, int child) {
        std::vector<NodeId> out;
        for (auto j : mg.branch[u1][i][k]) out.push_back(c[child][j]);
        return names(ex.g, out);
      };
      CHECK(targets(0, u2) == std::vector<std::string>{"v3", "v8"});
      CHECK(targets(1, u3) == std::vector<std::string>{"v3", "v5"});
    }
  }

  TEST_CASE("grouped results flatten to the plain answer") {
    Example ex;
    EvalOptions opt;
    opt.group = {"u2"};
    GroupedResults gr = evaluate_grouped(ex.g, ex.idx, ex.q, opt);
    CHECK(gr.rows.size() == 2);
    ResultSet flat = gr.flatten();
    flat.sort_unique();
    ResultSet plain = evaluate(ex.g, ex.idx, ex.q);
    CHECK(flat.rows == plain.rows);
  }

  TEST_CASE("dedupe off enumerates the raw merge") {
    Example ex;
    EvalOptions opt;
    opt.dedupe = false;
    ResultSet raw = evaluate(ex.g, ex.idx, ex.q, opt);
    CHECK(raw.size() >= 5);
    raw.sort_unique();
    CHECK(raw.rows == evaluate(ex.g, ex.idx, ex.q).rows);
  }

  TEST_CASE("answers do not depend on node order") {
    CorpusSpec spec;
    spec.nodes = 50;
    std::mt19937_64 rng(31);
    for (int n = 0; n < 40; ++n) {
      DataGraph g = random_graph(spec, rng);
      Query q = random_query(spec, random_shape(spec, rng), rng);
      std::vector<NodeId> perm(g.size());
      for (NodeId v = 0; v < g.size(); ++v) perm[v] = v;
      std::shuffle(perm.begin(), perm.end(), rng);
      DataGraph h;
      for (NodeId v : perm) h.add_node(g.id(v), g.attributes(v));
      for (NodeId v = 0; v < g.size(); ++v)
        for (NodeId w : g.out(v)) h.add_edge(h.at(g.id(v)), h.at(g.id(w)));
      h.finalize();
      CHECK(evaluate(g, ReachIndex::build(g), q).lines(q, g) == evaluate(h, ReachIndex::build(h), q).lines(q, h));
    }
  }

  TEST_CASE("downward pruning keeps exactly the downward matches") {
    CorpusSpec spec;
    spec.nodes = 60;
    std::mt19937_64 rng(41);
    for (int n = 0; n < 60; ++n) {
      spec.back_edges = n % 2 ? 0.2 : 0.0;
      DataGraph g = random_graph(spec, rng);
      Query q = random_query(spec, random_shape(spec, rng), rng);
      ReachIndex idx = ReachIndex::build(g);
      CandidateMap c = prune_downward(idx, g, q, initial_candidates(g, q));
      auto down = oracle_downward_match(g, q);
      for (int u = 0; u < q.size(); ++u) {
        std::vector<NodeId> want;
        for (NodeId v = 0; v < g.size(); ++v)
          if (down[u][v]) want.push_back(v);
        CHECK(c[u] == want);
      }
    }
  }

  TEST_CASE("agrees with the oracle on random instances") {
    CorpusSpec spec;
    spec.nodes = 40;
    std::mt19937_64 rng(21);
    int nonempty = 0;
    for (int n = 0; n < 120; ++n) {
      spec.back_edges = n % 3 == 0 ? 0.2 : 0.0;
      spec.density = n % 2 ? 1.5 : 3.0;
      DataGraph g = random_graph(spec, rng);
      ReachIndex idx = ReachIndex::build(g);
      Query q = random_query(spec, random_shape(spec, rng), rng);
      ResultSet want = oracle_evaluate(g, q);
      want.sort_unique();
      EngineStats st;
      ResultSet got = evaluate(g, idx, q, {}, &st);
      CHECK_MESSAGE(got.rows == want.rows, "instance " << n << "\n" << q.to_json().dump());
      CHECK(st.max_lout_per_node <= 1);
      CHECK(st.max_lin_per_parent <= 1);
      EvalOptions pw;
      pw.pairwise_edges = true;
      CHECK(evaluate(g, idx, q, pw).rows == want.rows);
      nonempty += !want.empty();
    }
    CHECK(nonempty > 20);
  }
}

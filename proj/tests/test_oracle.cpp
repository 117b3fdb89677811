#include "doctest.h"
#include "gtea/oracle.hpp"
#include "support.hpp"

using namespace gtea;

TEST_SUITE("naive_oracle") {
  TEST_CASE("reachability on the running example") {
    DataGraph g = load_graph(fixture("running_graph.json"));
    CHECK(oracle_reaches(g, g.at("v3"), g.at("v9")));
    CHECK_FALSE(oracle_reaches(g, g.at("v9"), g.at("v3")));
    CHECK_FALSE(oracle_reaches(g, g.at("v3"), g.at("v3")));
    ClosureMatrix c(g);
    auto closure = bfs_closure(g);
    for (NodeId a = 0; a < g.size(); ++a)
      for (NodeId b = 0; b < g.size(); ++b) CHECK(c.reaches(a, b) == (closure[a][b] != 0));
  }

  TEST_CASE("downward matches of the running example") {
    DataGraph g = load_graph(fixture("running_graph.json"));
    Query q = Query::load(fixture("running_query.json"));
    auto down = oracle_downward_match(g, q);
    const int u3 = q.index_of("u3");
    CHECK(down[u3][g.at("v3")]);
    CHECK(down[u3][g.at("v5")]);
    std::vector<NodeId> m2;
    for (NodeId v = 0; v < g.size(); ++v)
      if (down[q.index_of("u2")][v]) m2.push_back(v);
    CHECK(names(g, m2) == std::vector<std::string>{"v3", "v8"});
  }

  TEST_CASE("answers are closed under the match definition") {
    DataGraph g = load_graph(fixture("running_graph.json"));
    Query q = Query::load(fixture("running_query.json"));
    ResultSet rs = oracle_evaluate(g, q);
    CHECK(rs.size() == 5);
    auto down = oracle_downward_match(g, q);
    ClosureMatrix c(g);
    // Each answer respects the edge between the two outputs.
    for (const auto& row : rs.rows) {
      CHECK(down[rs.columns[0]][row[0]]);
      CHECK(down[rs.columns[1]][row[1]]);
      CHECK(c.reaches(row[0], row[1]));
    }
  }

  TEST_CASE("resource cap") {
    DataGraph g = load_graph(fixture("running_graph.json"));
    Query q = Query::load(fixture("running_query.json"));
    CHECK_THROWS_AS(oracle_evaluate(g, q, OracleLimits{5000, 2}), ResourceCapExceeded);
    CHECK_THROWS_AS(oracle_evaluate(g, q, OracleLimits{3, 100}), ResourceCapExceeded);
  }
}

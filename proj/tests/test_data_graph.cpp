#include <random>

#include "doctest.h"
#include "gtea/data_graph.hpp"
#include "support.hpp"

using namespace gtea;

TEST_SUITE("data_graph") {
  TEST_CASE("attribute predicate parsing and printing") {
    auto p = AttributePredicate::parse("label=b && level>=2");
    REQUIRE(p.atoms().size() == 2);
    CHECK(p.atoms()[0].attr == "label");
    CHECK(p.atoms()[0].literal.is_text());
    CHECK(p.atoms()[1].op == CmpOp::Ge);
    CHECK(p.atoms()[1].literal.is_int());
    CHECK(p.str() == "label=b && level>=2");
    CHECK(AttributePredicate::parse("name = \"two words\"").str() == "name=\"two words\"");
    CHECK(AttributePredicate::parse("x<1.5").atoms()[0].literal.number() == doctest::Approx(1.5));
    CHECK(AttributePredicate::parse("").empty());
    CHECK(AttributePredicate::parse("*").empty());
    CHECK_THROWS_AS(AttributePredicate::parse("label"), AttributeSyntaxError);
    CHECK_THROWS_AS(AttributePredicate::parse("label=a level=1"), AttributeSyntaxError);
    CHECK_THROWS_AS(AttributePredicate::parse("x='open"), AttributeSyntaxError);
  }

  TEST_CASE("typed comparison") {
    Attributes a{{"label", Value("b")}, {"level", Value(2)}, {"w", Value(2.5)}};
    CHECK(AttributePredicate::parse("label=b && level>=2").satisfied_by(a));
    CHECK_FALSE(AttributePredicate::parse("label=b && level>2").satisfied_by(a));
    CHECK(AttributePredicate::parse("w>2 && w<3").satisfied_by(a));
    CHECK_FALSE(AttributePredicate::parse("level=b").satisfied_by(a));
    CHECK_FALSE(AttributePredicate::parse("label>1").satisfied_by(a));
    CHECK_FALSE(AttributePredicate::parse("missing!=1").satisfied_by(a));
    CHECK(AttributePredicate::parse("label<c").satisfied_by(a));
  }

  TEST_CASE("satisfiability and implication") {
    CHECK(AttributePredicate::parse("x>1 && x<2").satisfiable());
    CHECK_FALSE(AttributePredicate::parse("x>1 && x<1").satisfiable());
    CHECK_FALSE(AttributePredicate::parse("x>=1 && x<=1 && x!=1").satisfiable());
    CHECK_FALSE(AttributePredicate::parse("x=a && x=b").satisfiable());
    CHECK_FALSE(AttributePredicate::parse("x=a && x>1").satisfiable());
    CHECK(AttributePredicate::parse("x!=1 && x!=2 && x>=1 && x<=2.5").satisfiable());

    auto imp = [](const char* a, const char* b) {
      return AttributePredicate::parse(a).implies(AttributePredicate::parse(b));
    };
    CHECK(imp("label=b && level>=2", "label=b && level>=1"));
    CHECK_FALSE(imp("label=b && level>=1", "label=b && level>=2"));
    CHECK(imp("x<5", "x<=5"));
    CHECK_FALSE(imp("x<=5", "x<5"));
    CHECK(imp("x=3", "x!=4"));
    CHECK(imp("x=3", "x>=3"));
    CHECK_FALSE(imp("x=3", "label=a"));
    CHECK(imp("label=a", ""));
    CHECK(imp("x>2 && x<1", "label=zzz"));
    CHECK_FALSE(imp("x=a", "x>=1"));
  }

  TEST_CASE("implication agrees with sampled values") {
    std::mt19937 rng(3);
    const char* ops[] = {"=", "!=", "<", "<=", ">", ">="};
    auto random_pred = [&] {
      std::string s;
      const int n = 1 + rng() % 3;
      for (int i = 0; i < n; ++i) {
        if (i) s += " && ";
        s += std::string("x") + ops[rng() % 6] + std::to_string(static_cast<int>(rng() % 5));
      }
      return AttributePredicate::parse(s);
    };
    for (int i = 0; i < 500; ++i) {
      auto a = random_pred(), b = random_pred();
      bool sampled_sat = false, counter = false;
      for (int k = -4; k <= 40; ++k) {
        Attributes m{{"x", Value(k / 4.0)}};
        if (a.satisfied_by(m)) {
          sampled_sat = true;
          if (!b.satisfied_by(m)) counter = true;
        }
      }
      CHECK(a.satisfiable() == sampled_sat);
      if (a.implies(b)) CHECK_FALSE(counter);
      auto w = find_attributes(a, {b});
      if (w) {
        CHECK(a.satisfied_by(*w));
        CHECK_FALSE(b.satisfied_by(*w));
      } else {
        CHECK_FALSE(counter);
      }
    }
  }

  TEST_CASE("json loading and candidate sets") {
    DataGraph g = load_graph(fixture("running_graph.json"));
    CHECK(g.size() == 16);
    CHECK(g.edge_count() == 17);
    CHECK(g.has_edge(g.at("v3"), g.at("v4")));
    auto c = candidate_set(g, AttributePredicate::parse("label=d && level>=1"));
    CHECK(names(g, c) == std::vector<std::string>{"v11", "v12", "v14"});
    CHECK_THROWS_AS(graph_from_json(nlohmann::json::parse(R"({"nodes":[{"id":"a"},{"id":"a"}]})")), InputError);
    CHECK_THROWS_AS(graph_from_json(nlohmann::json::parse(R"({"nodes":[{"id":"a"}],"edges":[["a","b"]]})")),
                    InputError);
    CHECK_THROWS_AS(graph_from_json(nlohmann::json::parse(R"({"edges":[]})")), InputError);
    DataGraph h = graph_from_json(graph_to_json(g));
    CHECK(h.size() == g.size());
    CHECK(h.edge_count() == g.edge_count());
    CHECK(h.attr(h.at("v12"), "level")->integer() == 2);
  }

  TEST_CASE("condensation") {
    DataGraph g;
    for (const char* id : {"a", "b", "c", "d", "e"}) g.add_node(id);
    auto e = [&](const char* s, const char* d) { g.add_edge(g.at(s), g.at(d)); };
    e("a", "b");
    e("b", "c");
    e("c", "b");
    e("c", "d");
    e("e", "e");
    g.finalize();
    Condensation c = condense(g);
    CHECK(c.size() == 4);
    CHECK(c.comp[g.at("b")] == c.comp[g.at("c")]);
    CHECK(c.cyclic[c.comp[g.at("b")]]);
    CHECK(c.cyclic[c.comp[g.at("e")]]);
    CHECK_FALSE(c.cyclic[c.comp[g.at("a")]]);
    CHECK_FALSE(c.acyclic());
    for (std::size_t k = 0; k < c.size(); ++k)
      for (auto m : c.out[k]) CHECK(m > k);

    std::mt19937 rng(9);
    for (int round = 0; round < 30; ++round) {
      DataGraph r = random_digraph(rng, 40, 70);
      Condensation rc = condense(r);
      auto closure = bfs_closure(r);
      for (NodeId a = 0; a < r.size(); ++a)
        for (NodeId b = 0; b < r.size(); ++b) {
          const bool same = rc.comp[a] == rc.comp[b];
          CHECK(same == (a == b ? true : (closure[a][b] && closure[b][a])));
          if (rc.comp[a] != rc.comp[b] && closure[a][b]) CHECK(rc.comp[a] < rc.comp[b]);
        }
    }
  }
}

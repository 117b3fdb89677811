#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "gtea/reach_index.hpp"
#include "support.hpp"

using namespace gtea;

namespace {

std::vector<std::string> position_names(const DataGraph& g, const ReachIndex& idx, const std::vector<ChainPos>& ps) {
  std::vector<NodeId> nodes;
  for (const auto& p : ps) nodes.push_back(idx.representative(idx.at(p)));
  return names(g, nodes);
}

std::vector<std::string> contour_names(const DataGraph& g, const ReachIndex& idx, const Contour& c) {
  std::vector<ChainPos> ps;
  for (const auto& e : c.entries()) ps.push_back({e.cid, e.sid});
  return position_names(g, idx, ps);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

void check_against_closure(const DataGraph& g, const ReachIndex& idx) {
  auto closure = bfs_closure(g);
  for (NodeId a = 0; a < g.size(); ++a)
    for (NodeId b = 0; b < g.size(); ++b) CHECK_MESSAGE(idx.reaches(a, b) == (closure[a][b] != 0), a << "->" << b);
}

}  // namespace

TEST_SUITE("reach_index") {
  TEST_CASE("transcribed compressed lists reproduce the worked example") {
    DataGraph g = load_graph(fixture("running_graph.json"));
    ReachIndex idx = ReachIndex::from_json(g, read_json(fixture("running_index.json")));
    CHECK(idx.chain_count() == 5);
    CHECK(position_names(g, idx, idx.x_list(idx.vertex_of(g.at("v3")))) == std::vector<std::string>{"v3", "v4"});
    CHECK(position_names(g, idx, idx.y_list(idx.vertex_of(g.at("v9")))) == std::vector<std::string>{"v12", "v9"});
    const Vertex p = idx.prev(idx.vertex_of(g.at("v15")));
    REQUIRE(p != kNoVertex);
    CHECK(g.id(idx.representative(p)) == "v6");
    std::vector<NodeId> mat_u10{g.at("v9"), g.at("v10"), g.at("v13"), g.at("v15")};
    CHECK(contour_names(g, idx, idx.pred_contour(mat_u10)) ==
          std::vector<std::string>{"v13", "v15", "v3", "v9"});
    check_against_closure(g, idx);
  }

  TEST_CASE("complete lists for a given cover") {
    DataGraph g = load_graph(fixture("running_graph.json"));
    ReachIndex idx = ReachIndex::build(
        g, {{"v1", "v3", "v7", "v11", "v16"}, {"v2", "v4", "v12", "v13", "v14"}, {"v8"}, {"v5", "v9"}, {"v6", "v10", "v15"}});
    check_against_closure(g, idx);
    CHECK(position_names(g, idx, idx.x_list(idx.vertex_of(g.at("v3")))) ==
          std::vector<std::string>{"v3", "v4", "v5", "v6", "v8"});
    CHECK_THROWS_AS(ReachIndex::build(g, {{"v1", "v2"}}), InputError);
    CHECK_THROWS_AS(ReachIndex::build(g, {{"v16", "v1"}}), InputError);
  }

  TEST_CASE("loader rejects inconsistent indexes") {
    DataGraph g = load_graph(fixture("running_graph.json"));
    auto j = read_json(fixture("running_index.json"));
    auto bad = j;
    bad["lout"].erase("v3");
    CHECK_THROWS_AS(ReachIndex::from_json(g, bad), InputError);
    bad = j;
    bad["version"] = 2;
    CHECK_THROWS_AS(ReachIndex::from_json(g, bad), InputError);
    bad = j;
    bad["lin"]["v4"][0]["sid"] = 42;
    CHECK_THROWS_AS(ReachIndex::from_json(g, bad), InputError);
    bad = j;
    bad["chains"][2] = nlohmann::json::array();
    CHECK_THROWS_AS(ReachIndex::from_json(g, bad), InputError);
  }

  TEST_CASE("serialization round trip") {
    std::mt19937 rng(21);
    for (int round = 0; round < 10; ++round) {
      DataGraph g = random_digraph(rng, 60, 90);
      ReachIndex idx = ReachIndex::build(g);
      ReachIndex back = ReachIndex::from_json(g, idx.to_json());
      CHECK(back.to_json() == idx.to_json());
      check_against_closure(g, back);
    }
  }

  TEST_CASE("reachability and contours on random graphs") {
    std::mt19937 rng(17);
    for (int round = 0; round < 40; ++round) {
      const bool cyclic = round % 4 == 3;
      DataGraph g = cyclic ? random_digraph(rng, 80, 120) : random_dag(rng, 80, 1.0 + round % 3);
      ReachIndex idx = ReachIndex::build(g);
      auto closure = bfs_closure(g);
      check_against_closure(g, idx);
      for (int s = 0; s < 20; ++s) {
        std::vector<NodeId> set;
        for (NodeId v = 0; v < g.size(); ++v)
          if (rng() % 7 == 0) set.push_back(v);
        ReadCounter rc;
        rc.reset(idx.vertex_count());
        Contour cp = idx.pred_contour(set, &rc);
        Contour cs = idx.succ_contour(set, &rc);
        CHECK(rc.max_lin() <= 1);
        CHECK(rc.max_lout() <= 1);
        CHECK(cp.size() <= idx.chain_count());
        CHECK(cs.size() <= idx.chain_count());
        for (NodeId v = 0; v < g.size(); ++v) {
          bool down = false, up = false;
          for (NodeId w : set) {
            down = down || closure[v][w];
            up = up || closure[w][v];
          }
          CHECK(idx.reaches_set(v, cp) == down);
          CHECK(idx.set_reaches(cs, v) == up);
        }
      }
    }
  }
}

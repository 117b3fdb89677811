#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "gtea/analysis.hpp"
#include "gtea/corpus.hpp"
#include "gtea/engine.hpp"
#include "gtea/oracle.hpp"
#include "support.hpp"

using namespace gtea;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string note;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Query with_outputs(const Query& q, const std::set<std::string>& outs) {
  std::vector<QueryNode> nodes = q.nodes();
  for (auto& n : nodes) n.output = outs.count(n.id) > 0;
  return Query(std::move(nodes));
}

std::vector<NodeId> mat(const CandidateMap& c, const Query& q, const char* id) { return c[q.index_of(id)]; }

std::vector<NodeId> at(const DataGraph& g, std::initializer_list<const char*> ids) {
  std::vector<NodeId> out;
  for (const char* s : ids) out.push_back(g.at(s));
  std::sort(out.begin(), out.end());
  return out;
}

// Worst per-list read counts seen by the engine over all evaluations.
std::uint32_t g_worst_lout = 0, g_worst_lin = 0;
std::size_t g_evaluations = 0;

ResultSet run(const DataGraph& g, const ReachIndex& idx, const Query& q, const EvalOptions& opt = {}) {
  EngineStats st;
  ResultSet rs = evaluate(g, idx, q, opt, &st);
  g_worst_lout = std::max(g_worst_lout, st.max_lout_per_node);
  g_worst_lin = std::max(g_worst_lin, st.max_lin_per_parent);
  ++g_evaluations;
  return rs;
}

Outcome running_end_to_end() {
  const auto t = Clock::now();
  DataGraph g = load_graph(fixture("running_graph.json"));
  Query q = Query::load(fixture("running_query.json"));
  ReachIndex idx = ReachIndex::build(g);
  ResultSet rs = run(g, idx, q);
  const double s = seconds_since(t);
  std::set<std::pair<std::string, std::string>> got, want{
      {"v3", "v11"}, {"v3", "v12"}, {"v3", "v14"}, {"v8", "v12"}, {"v8", "v14"}};
  for (const auto& r : rs.rows) got.emplace(g.id(r[0]), g.id(r[1]));
  Outcome o;
  o.pass = got == want && rs.size() == 5 && s < 1.0;
  o.note = std::to_string(rs.size()) + " tuples in " + std::to_string(s) + " s";
  return o;
}

Outcome running_pruning() {
  DataGraph g = load_graph(fixture("running_graph.json"));
  Query q = Query::load(fixture("running_query.json"));
  ReachIndex idx = ReachIndex::build(g);
  EngineStats st;
  CandidateMap c = prune_downward(idx, g, q, initial_candidates(g, q), &st);
  Outcome o;
  o.pass = mat(c, q, "u2") == at(g, {"v3", "v8"}) && mat(c, q, "u3") == at(g, {"v3", "v5"});
  Query q23 = with_outputs(q, {"u2", "u3"});
  CandidateMap up = prune_upward(idx, g, q23, prime_subtree(q23, c), c, &st);
  const bool unchanged = up == c;
  o.pass = o.pass && unchanged;
  o.note = std::string("mat(u2),mat(u3) after downward ") + (o.pass ? "match" : "differ") + ", upward " +
           (unchanged ? "unchanged" : "changed");
  return o;
}

Outcome reachability_vs_bfs() {
  const auto t = Clock::now();
  std::mt19937 rng(3);
  const double densities[] = {1.2, 2.0, 4.0};
  std::size_t pairs = 0, wrong = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 20 + rng() % 481;
    DataGraph g = random_dag(rng, n, densities[i % 3]);
    ReachIndex idx = ReachIndex::build(g);
    auto c = bfs_closure(g);
    for (NodeId a = 0; a < n; ++a)
      for (NodeId b = 0; b < n; ++b, ++pairs) wrong += idx.reaches(a, b) != (c[a][b] != 0);
  }
  const double s = seconds_since(t);
  return {wrong == 0 && s < 60, std::to_string(pairs) + " pairs, " + std::to_string(wrong) + " disagreements, " +
                                    std::to_string(s) + " s"};
}

Outcome contour_laws() {
  std::mt19937 rng(4);
  std::size_t sets = 0, wrong = 0, oversize = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 30 + rng() % 200;
    DataGraph g = i % 2 ? random_dag(rng, n, 2.0) : random_digraph(rng, n, 2 * n);
    ReachIndex idx = ReachIndex::build(g);
    auto c = bfs_closure(g);
    for (int k = 0; k < 100; ++k, ++sets) {
      std::vector<NodeId> s;
      const std::size_t want = 1 + rng() % 12;
      for (std::size_t j = 0; j < want; ++j) s.push_back(rng() % n);
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
      Contour pred = idx.pred_contour(s), succ = idx.succ_contour(s);
      oversize += pred.size() > idx.chain_count() || succ.size() > idx.chain_count();
      for (NodeId v = 0; v < n; ++v) {
        bool down = false, up = false;
        for (NodeId w : s) down = down || c[v][w], up = up || c[w][v];
        wrong += idx.reaches_set(v, pred) != down;
        wrong += idx.set_reaches(succ, v) != up;
      }
    }
  }
  return {wrong == 0 && oversize == 0, std::to_string(sets) + " sets, " + std::to_string(wrong) +
                                           " mismatches, " + std::to_string(oversize) + " oversized contours"};
}

Outcome engine_differential() {
  const auto t = Clock::now();
  CorpusSpec spec;
  spec.not_fraction = 0.45;
  spec.or_fraction = 0.45;
  spec.pc_fraction = 0.4;
  std::mt19937_64 rng(5);
  int with_not = 0, with_or = 0, with_pc = 0, wrong = 0, nonempty = 0;
  const int total = 300;
  for (int i = 0; i < total; ++i) {
    spec.nodes = 10 + rng() % 91;
    spec.density = 1.0 + static_cast<double>(rng() % 30) / 10.0;
    spec.back_edges = i % 4 == 0 ? 0.15 : 0.0;
    DataGraph g = random_graph(spec, rng);
    ReachIndex idx = ReachIndex::build(g);
    Query q = random_query(spec, random_shape(spec, rng), rng);
    with_not += has_not(q);
    with_or += has_or(q);
    with_pc += has_pc(q);
    ResultSet want = oracle_evaluate(g, q);
    want.sort_unique();
    ResultSet got = run(g, idx, q);
    nonempty += !want.empty();
    if (got.rows != want.rows) {
      ++wrong;
      std::cerr << "differential mismatch on instance " << i << "\n" << q.to_json().dump() << "\n";
    }
  }
  const double s = seconds_since(t);
  const bool mix = with_or >= 0.3 * total && with_not >= 0.3 * total && with_pc >= 0.25 * total;
  std::ostringstream note;
  note << total << " instances (" << with_or << " OR, " << with_not << " NOT, " << with_pc << " PC, " << nonempty
       << " nonempty), " << wrong << " mismatches, " << s << " s";
  return {wrong == 0 && mix && s < 300, note.str()};
}

Outcome index_values() {
  DataGraph g = load_graph(fixture("running_graph.json"));
  std::ifstream in(fixture("running_index.json"));
  ReachIndex idx = ReachIndex::from_json(g, nlohmann::json::parse(in));
  auto pos_names = [&](const std::vector<ChainPos>& ps) {
    std::vector<NodeId> nodes;
    for (const auto& p : ps) nodes.push_back(idx.representative(idx.at(p)));
    return names(g, nodes);
  };
  using S = std::vector<std::string>;
  const bool x = pos_names(idx.x_list(idx.vertex_of(g.at("v3")))) == S{"v3", "v4"};
  const bool y = pos_names(idx.y_list(idx.vertex_of(g.at("v9")))) == S{"v12", "v9"};
  const Vertex p = idx.prev(idx.vertex_of(g.at("v15")));
  const bool prev = p != kNoVertex && g.id(idx.representative(p)) == "v6";
  std::vector<ChainPos> cs;
  const Contour c = idx.pred_contour(at(g, {"v9", "v10", "v13", "v15"}));
  for (const auto& e : c.entries()) cs.push_back({e.cid, e.sid});
  const bool contour = pos_names(cs) == S{"v13", "v15", "v3", "v9"};
  std::ostringstream note;
  note << "X_v3 " << (x ? "ok" : "bad") << ", Y_v9 " << (y ? "ok" : "bad") << ", prev(v15) " << (prev ? "ok" : "bad")
       << ", contour " << (contour ? "ok" : "bad");
  return {x && y && prev && contour, note.str()};
}

Outcome variant_goldens() {
  Query n1 = Query::load(fixture("variant_q1.json"));
  Query n2 = Query::load(fixture("variant_q2.json"));
  const bool sat = !QueryAnalysis(n1).satisfiable() && QueryAnalysis(n2).satisfiable();
  Query q1 = Query::load(fixture("variant_q1_pos.json"));
  Query q2 = Query::load(fixture("variant_q2_pos.json"));
  Query q3 = Query::load(fixture("variant_q3.json"));
  QueryAnalysis a1(q1), a2(q2), a3(q3);
  auto verified = [](const QueryAnalysis& from, const QueryAnalysis& to) {
    auto h = find_homomorphism(from, to);
    return h && verify_homomorphism(from, to, *h);
  };
  const bool cont = verified(a3, a2) && verified(a1, a2) && verified(a3, a1) && verified(a1, a3);
  Query m = minimize(q1);
  const bool min = m.size() == 4 && isomorphic(m, q3) && m.node(m.root()).structural.is_true();
  std::ostringstream note;
  note << "sat " << (sat ? "ok" : "bad") << ", containment " << (cont ? "ok" : "bad") << ", minimize "
       << (min ? "ok" : "bad");
  return {sat && cont && min, note.str()};
}

Outcome witnesses() {
  CorpusSpec spec;
  spec.query_max = 8;
  std::mt19937_64 rng(8);
  int sat = 0, bad = 0, uc = 0, uc_bad = 0;
  for (int i = 0; i < 200; ++i) {
    Query q = random_query(spec, random_shape(spec, rng), rng);
    QueryAnalysis qa(q);
    bool attrs = true;
    for (int u = 0; u < q.size(); ++u) attrs = attrs && qa.attr_satisfiable(u);
    if (attrs && q.classify() != QueryClass::General) {
      ++uc;
      uc_bad += !qa.satisfiable();
    }
    if (!qa.satisfiable()) continue;
    ++sat;
    if (oracle_evaluate(qa.witness_graph(), q).empty()) {
      ++bad;
      std::cerr << "empty witness for\n" << q.to_json().dump() << "\n";
    }
  }
  std::ostringstream note;
  note << sat << " satisfiable, " << bad << " empty witnesses, " << uc << " union-conjunctive, " << uc_bad
       << " reported unsatisfiable";
  return {bad == 0 && uc_bad == 0, note.str()};
}

Outcome containment_soundness() {
  CorpusSpec spec;
  spec.query_max = 7;
  spec.nodes = 30;
  std::mt19937_64 rng(9);
  int pairs = 0, bad = 0;
  for (int i = 0; i < 2000 && pairs < 100; ++i) {
    Query wide = random_query(spec, random_shape(spec, rng), rng);
    Query narrow = strengthen(wide, rng);
    if (!contains(narrow, wide)) continue;
    QueryAnalysis aw(wide), an(narrow);
    auto h = find_homomorphism(aw, an);
    if (!h) {
      ++bad;
      continue;
    }
    ++pairs;
    for (int k = 0; k < 20; ++k) bad += !answers_contained(narrow, wide, *h, random_graph(spec, rng));
  }
  return {pairs >= 100 && bad == 0, std::to_string(pairs) + " pairs, " + std::to_string(bad) + " violations"};
}

Outcome minimization_laws() {
  CorpusSpec spec;
  spec.query_max = 9;
  std::mt19937_64 rng(10);
  int bad = 0, shrunk = 0;
  for (int i = 0; i < 200; ++i) {
    Query q = random_query(spec, random_shape(spec, rng), rng);
    Query m = minimize(q);
    shrunk += m.size() < q.size();
    if (!equivalent(q, m) || m.size() > q.size() || !isomorphic(minimize(m), m)) ++bad;
  }
  return {bad == 0, "200 queries, " + std::to_string(shrunk) + " shrunk, " + std::to_string(bad) + " violations"};
}

Outcome list_reads() {
  std::ostringstream note;
  note << g_evaluations << " evaluations, max exit-list reads per node " << g_worst_lout
       << ", max entry-list reads per parent " << g_worst_lin;
  return {g_evaluations > 0 && g_worst_lout <= 1 && g_worst_lin <= 1, note.str()};
}

Outcome scalability() {
  const auto t = Clock::now();
  DataGraph g = tree_with_cross_edges(1000000, 200000, 6, 12);
  const double gen = seconds_since(t);
  const auto t1 = Clock::now();
  ReachIndex idx = ReachIndex::build(g);
  const double index = seconds_since(t1);
  Query q = Query::from_json(nlohmann::json::parse(R"({"nodes":[
    {"id":"u1","attr":"label=a && level=1"},
    {"id":"u2","parent":"u1","attr":"label=b","structural":"u5"},
    {"id":"u3","parent":"u2","attr":"label=d && level>=2","structural":"u6"},
    {"id":"u4","parent":"u3","attr":"label=e && level=3","output":true,"structural":"u7"},
    {"id":"u5","parent":"u2","kind":"predicate","edge":"PC","attr":"label=c"},
    {"id":"u6","parent":"u3","kind":"predicate","attr":"label=f"},
    {"id":"u7","parent":"u4","kind":"predicate","attr":"label=a && level=2"}]})"));
  const auto t2 = Clock::now();
  ResultSet rs = run(g, idx, q);
  const double query = seconds_since(t2);
  const double total = index + query;
  std::ostringstream note;
  note << g.size() << " nodes, " << g.edge_count() << " edges, generated in " << gen << " s, indexed in " << index
       << " s (" << idx.chain_count() << " chains), " << rs.size() << " answers in " << query << " s";
  return {total < 30, note.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    bool informational;
  };
  const Criterion all[] = {
      {"1 running example end to end", running_end_to_end, false},
      {"2 pruning rounds on the running example", running_pruning, false},
      {"3 reachability agrees with BFS", reachability_vs_bfs, false},
      {"4 contour laws", contour_laws, false},
      {"5 engine differential against the oracle", engine_differential, false},
      {"6 index values of the worked example", index_values, false},
      {"7 containment and minimization goldens", variant_goldens, false},
      {"8 satisfiability witnesses", witnesses, false},
      {"9 containment soundness on random graphs", containment_soundness, false},
      {"10 minimization laws", minimization_laws, false},
      {"11 list reads per query node", list_reads, false},
      {"12 scalability smoke (informational)", scalability, true},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.note.c_str());
    std::fflush(stdout);
    if (!o.pass && !c.informational) ++failed;
  }
  return failed == 0 ? 0 : 1;
}

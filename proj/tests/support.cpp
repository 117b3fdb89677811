#include "support.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "gtea/oracle.hpp"

using namespace gtea;

std::string fixture(const std::string& name) { return std::string(GTEA_FIXTURES) + "/" + name; }

std::vector<std::string> names(const DataGraph& g, std::vector<NodeId> nodes) {
  std::vector<std::string> out;
  for (NodeId v : nodes) out.push_back(g.id(v));
  std::sort(out.begin(), out.end());
  return out;
}

DataGraph random_digraph(std::mt19937& rng, std::size_t n, std::size_t m) {
  DataGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
  for (std::size_t i = 0; i < m; ++i) g.add_edge(rng() % n, rng() % n);
  g.finalize();
  return g;
}

DataGraph random_dag(std::mt19937& rng, std::size_t n, double density) {
  DataGraph g;
  std::vector<NodeId> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<NodeId>(i);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
  const auto m = static_cast<std::size_t>(density * n);
  for (std::size_t i = 0; i < m && n > 1; ++i) {
    std::size_t a = rng() % n, b = rng() % n;
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    g.add_edge(perm[a], perm[b]);
  }
  g.finalize();
  return g;
}

std::vector<std::vector<char>> bfs_closure(const DataGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  for (NodeId s = 0; s < n; ++s) {
    std::vector<NodeId> queue(g.out(s).begin(), g.out(s).end());
    for (NodeId w : queue) r[s][w] = 1;
    for (std::size_t i = 0; i < queue.size(); ++i)
      for (NodeId w : g.out(queue[i]))
        if (!r[s][w]) {
          r[s][w] = 1;
          queue.push_back(w);
        }
  }
  return r;
}

Query strengthen(const Query& q, std::mt19937_64& rng) {
  std::vector<QueryNode> nodes = q.nodes();
  const int edits = 1 + static_cast<int>(rng() % 2);
  for (int e = 0; e < edits; ++e) {
    const int u = static_cast<int>(rng() % nodes.size());
    switch (rng() % 4) {
      case 0:
        if (nodes[u].parent >= 0) nodes[u].edge = EdgeType::PC;
        break;
      case 1:
        nodes[u].attr = AttributePredicate::parse(
            (nodes[u].attr.empty() ? std::string() : nodes[u].attr.str() + " && ") + "level>=2");
        break;
      case 2: {
        QueryNode c;
        c.id = "s" + std::to_string(nodes.size());
        c.kind = NodeKind::Predicate;
        c.parent = u;
        c.attr = AttributePredicate::parse(std::string("label=") + static_cast<char>('a' + rng() % 3));
        nodes[u].structural = Formula::conj(nodes[u].structural, Formula::var(c.id));
        nodes.push_back(std::move(c));
        break;
      }
      default:
        if (nodes[u].backbone()) {
          QueryNode c;
          c.id = "s" + std::to_string(nodes.size());
          c.parent = u;
          c.attr = AttributePredicate::parse(std::string("label=") + static_cast<char>('a' + rng() % 3));
          nodes.push_back(std::move(c));
        }
    }
  }
  return Query(std::move(nodes));
}

bool answers_contained(const Query& narrow, const Query& wide, const NodeMap& lambda, const DataGraph& g) {
  ResultSet rn = oracle_evaluate(g, narrow);
  if (rn.empty()) return true;
  ResultSet rw = oracle_evaluate(g, wide);
  std::set<std::map<int, NodeId>> allowed;
  for (const auto& row : rw.rows) {
    std::map<int, NodeId> t;
    for (std::size_t i = 0; i < rw.columns.size(); ++i) t[lambda.at(rw.columns[i])] = row[i];
    allowed.insert(t);
  }
  for (const auto& row : rn.rows) {
    std::map<int, NodeId> t;
    for (std::size_t i = 0; i < rn.columns.size(); ++i) t[rn.columns[i]] = row[i];
    if (!allowed.count(t)) return false;
  }
  return true;
}

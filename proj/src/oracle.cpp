#include "gtea/oracle.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "gtea/formula.hpp"

namespace gtea {

namespace {

constexpr NodeId kUnbound = static_cast<NodeId>(-1);

bool related(const DataGraph& g, const ClosureMatrix& c, EdgeType e, NodeId v, NodeId w) {
  return e == EdgeType::PC ? g.has_edge(v, w) : c.reaches(v, w);
}

void bfs_row(const DataGraph& g, NodeId s, std::vector<char>& row) {
  std::deque<NodeId> queue;
  for (NodeId w : g.out(s))
    if (!row[w]) {
      row[w] = 1;
      queue.push_back(w);
    }
  while (!queue.empty()) {
    NodeId x = queue.front();
    queue.pop_front();
    for (NodeId w : g.out(x))
      if (!row[w]) {
        row[w] = 1;
        queue.push_back(w);
      }
  }
}

}  // namespace

ClosureMatrix::ClosureMatrix(const DataGraph& g) : rows_(g.size(), std::vector<char>(g.size(), 0)) {
  for (NodeId s = 0; s < g.size(); ++s) bfs_row(g, s, rows_[s]);
}

bool oracle_reaches(const DataGraph& g, NodeId a, NodeId b) {
  std::vector<char> row(g.size(), 0);
  bfs_row(g, a, row);
  return row[b] != 0;
}

std::vector<std::vector<char>> oracle_downward_match(const DataGraph& g, const ClosureMatrix& c, const Query& q) {
  std::vector<std::vector<char>> down(q.size(), std::vector<char>(g.size(), 0));
  for (int u : q.bottom_up()) {
    const auto& kids = q.children(u);
    std::vector<std::string> slots;
    for (int k : kids) slots.push_back(q.id(k));
    CompiledFormula f(q.extended(u), slots);
    std::vector<char> val(kids.size());
    for (NodeId v = 0; v < g.size(); ++v) {
      if (!g.matches(v, q.node(u).attr)) continue;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        const int k = kids[i];
        val[i] = 0;
        for (NodeId w = 0; w < g.size() && !val[i]; ++w)
          if (down[k][w] && related(g, c, q.node(k).edge, v, w)) val[i] = 1;
      }
      down[u][v] = f.eval(val) ? 1 : 0;
    }
  }
  return down;
}

std::vector<std::vector<char>> oracle_downward_match(const DataGraph& g, const Query& q) {
  return oracle_downward_match(g, ClosureMatrix(g), q);
}

ResultSet oracle_evaluate(const DataGraph& g, const Query& q, const OracleLimits& limits) {
  if (g.size() > limits.max_nodes) throw ResourceCapExceeded("graph too large for the oracle");
  ClosureMatrix c(g);
  auto down = oracle_downward_match(g, c, q);

  ResultSet rs;
  rs.columns = q.outputs();
  std::vector<int> column(q.size(), -1);
  for (std::size_t i = 0; i < rs.columns.size(); ++i) column[rs.columns[i]] = static_cast<int>(i);

  // part[u][v]: projections onto outputs of all backbone embeddings of
  // subtree(u) that send u to v.
  using Part = std::set<std::vector<NodeId>>;
  std::vector<std::vector<Part>> part(q.size());
  for (int u : q.bottom_up()) {
    if (!q.node(u).backbone()) continue;
    part[u].resize(g.size());
    for (NodeId v = 0; v < g.size(); ++v) {
      if (!down[u][v]) continue;
      std::vector<NodeId> seed(rs.columns.size(), kUnbound);
      if (column[u] >= 0) seed[column[u]] = v;
      Part acc{seed};
      for (int k : q.children(u)) {
        if (!q.node(k).backbone()) continue;
        Part options;
        for (NodeId w = 0; w < g.size(); ++w)
          if (down[k][w] && related(g, c, q.node(k).edge, v, w)) options.insert(part[k][w].begin(), part[k][w].end());
        Part next;
        for (const auto& a : acc)
          for (const auto& b : options) {
            auto t = a;
            for (std::size_t i = 0; i < t.size(); ++i)
              if (b[i] != kUnbound) t[i] = b[i];
            next.insert(std::move(t));
            if (next.size() > limits.max_results) throw ResourceCapExceeded("oracle result cap exceeded");
          }
        acc = std::move(next);
        if (acc.empty()) break;
      }
      part[u][v] = std::move(acc);
    }
  }
  Part all;
  const int r = q.root();
  for (NodeId v = 0; v < g.size(); ++v) {
    all.insert(part[r][v].begin(), part[r][v].end());
    if (all.size() > limits.max_results) throw ResourceCapExceeded("oracle result cap exceeded");
  }
  for (const auto& t : all) {
    if (std::find(t.begin(), t.end(), kUnbound) != t.end()) throw std::logic_error("oracle produced a partial tuple");
    rs.rows.push_back(t);
  }
  return rs;
}

}  // namespace gtea

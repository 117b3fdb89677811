#include "gtea/engine.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <unordered_map>

#include "gtea/formula.hpp"

namespace gtea {

namespace {

struct ChainGroups {
  // Per chain, (sid, vertex) pairs.
  std::map<std::uint32_t, std::vector<std::pair<std::uint32_t, Vertex>>> chains;
  std::unordered_map<Vertex, std::vector<std::size_t>> members;

  void add(const ReachIndex& idx, NodeId v, std::size_t tag) {
    const Vertex x = idx.vertex_of(v);
    auto& m = members[x];
    if (m.empty()) chains[idx.pos(x).cid].emplace_back(idx.pos(x).sid, x);
    m.push_back(tag);
  }
};

// Counts reads per list while one query node is handled.
class ReadScope {
 public:
  ReadScope(ReadCounter& rc, std::vector<char>& visited) : rc_(rc), visited_(visited) {}
  bool visit(Vertex w) {
    if (visited_[w]) return false;
    visited_[w] = 1;
    touched_.push_back(w);
    return true;
  }
  std::uint32_t finish() {
    std::uint32_t worst = 0;
    for (Vertex w : touched_) {
      worst = std::max({worst, rc_.lout[w], rc_.lin[w]});
      rc_.lout[w] = rc_.lin[w] = 0;
      visited_[w] = 0;
    }
    touched_.clear();
    return worst;
  }

 private:
  ReadCounter& rc_;
  std::vector<char>& visited_;
  std::vector<Vertex> touched_;
};

}  // namespace

nlohmann::json EngineStats::to_json(const Query& q) const {
  nlohmann::json cands = nlohmann::json::object();
  for (int u = 0; u < q.size(); ++u) {
    auto at = [&](const std::vector<std::size_t>& v) -> nlohmann::json {
      return u < static_cast<int>(v.size()) ? nlohmann::json(v[u]) : nlohmann::json(nullptr);
    };
    cands[q.id(u)] = {{"initial", at(initial)}, {"downward", at(after_downward)}, {"upward", at(after_upward)}};
  }
  return {{"candidates", cands},
          {"lout_reads", lout_reads},
          {"max_lout_reads_per_node", max_lout_per_node},
          {"lin_reads", lin_reads},
          {"max_lin_reads_per_parent", max_lin_per_parent},
          {"matching_graph_nodes", graph_nodes},
          {"matching_graph_edges", graph_edges},
          {"pc_edges_removed", pc_edges_removed},
          {"raw_tuples", raw_tuples}};
}

CandidateMap initial_candidates(const DataGraph& g, const Query& q) {
  CandidateMap c(q.size());
  for (int u = 0; u < q.size(); ++u) c[u] = candidate_set(g, q.node(u).attr);
  return c;
}

CandidateMap prune_downward(const ReachIndex& idx, const DataGraph& g, const Query& q, CandidateMap cands,
                            EngineStats* stats) {
  ReadCounter rc;
  rc.reset(idx.vertex_count());
  std::vector<char> visited(idx.vertex_count(), 0);

  for (int u : q.bottom_up()) {
    const auto& kids = q.children(u);
    std::vector<std::string> slots;
    for (int k : kids) slots.push_back(q.id(k));
    CompiledFormula f(q.extended(u), slots);
    std::vector<char> val(kids.size(), 0);
    if (kids.empty()) {
      if (!f.eval(val)) cands[u].clear();
      continue;
    }

    std::vector<Contour> contour(kids.size());
    std::vector<std::vector<char>> parents(kids.size());
    std::vector<int> ad;
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const auto& mk = cands[kids[k]];
      if (q.node(kids[k]).edge == EdgeType::PC) {
        parents[k].assign(g.size(), 0);
        for (NodeId w : mk)
          for (NodeId p : g.in(w)) parents[k][p] = 1;
      } else if (!mk.empty()) {
        contour[k] = idx.pred_contour(mk);
        ad.push_back(static_cast<int>(k));
      }
    }

    ChainGroups groups;
    for (std::size_t i = 0; i < cands[u].size(); ++i) groups.add(idx, cands[u][i], i);
    std::vector<NodeId> kept;
    ReadScope scope(rc, visited);
    for (auto& [cid, list] : groups.chains) {
      std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      std::vector<char> reach(kids.size(), 0);
      std::size_t open = ad.size();
      for (const auto& [sid, x] : list) {
        for (int k : ad)
          if (!reach[k] && ReachIndex::below(contour[k], idx.pos(x), true)) reach[k] = 1, --open;
        // Lists already read for a higher candidate on this chain are not
        // read again; their contribution is inherited through `reach`.
        for (Vertex w = idx.lout(x).empty() ? idx.next(x) : x; open > 0 && w != kNoVertex && scope.visit(w);
             w = idx.next(w))
          for (const auto& p : idx.lout(w, &rc))
            for (int k : ad)
              if (!reach[k] && ReachIndex::below(contour[k], p, false)) reach[k] = 1, --open;
        for (std::size_t i : groups.members[x]) {
          const NodeId v = cands[u][i];
          for (std::size_t k = 0; k < kids.size(); ++k)
            val[k] = q.node(kids[k]).edge == EdgeType::PC ? parents[k][v] : reach[k];
          if (f.eval(val)) kept.push_back(v);
        }
      }
    }
    const std::uint32_t worst = scope.finish();
    if (stats) stats->max_lout_per_node = std::max(stats->max_lout_per_node, worst);
    std::sort(kept.begin(), kept.end());
    cands[u] = std::move(kept);
  }
  if (stats) stats->lout_reads += rc.lout_total;
  return cands;
}

std::vector<int> output_paths(const Query& q) {
  std::vector<char> on(q.size(), 0);
  on[q.root()] = 1;
  for (int o : q.outputs())
    for (int p = o; p >= 0; p = q.parent(p)) on[p] = 1;
  std::vector<int> out;
  for (int u : q.top_down())
    if (on[u]) out.push_back(u);
  return out;
}

std::vector<int> prime_subtree(const Query& q, const CandidateMap& cands) {
  std::vector<char> on(q.size(), 0);
  on[q.root()] = 1;
  for (int o : q.outputs())
    if (cands[o].size() > 1)
      for (int p = o; p >= 0; p = q.parent(p)) on[p] = 1;
  std::vector<int> out;
  for (int u : q.top_down())
    if (on[u]) out.push_back(u);
  return out;
}

CandidateMap prune_upward(const ReachIndex& idx, const DataGraph& g, const Query& q, const std::vector<int>& tree,
                          CandidateMap cands, EngineStats* stats) {
  std::vector<char> in_tree(q.size(), 0);
  for (int u : tree) in_tree[u] = 1;
  ReadCounter rc;
  rc.reset(idx.vertex_count());
  std::vector<char> visited(idx.vertex_count(), 0);
  std::vector<char> mark(g.size(), 0);

  for (int u : tree) {
    std::vector<int> kids;
    for (int c : q.children(u))
      if (in_tree[c]) kids.push_back(c);
    if (kids.empty()) continue;
    if (cands[u].empty()) {
      for (int c : kids) cands[c].clear();
      continue;
    }
    Contour cs = idx.succ_contour(cands[u]);
    for (NodeId v : cands[u]) mark[v] = 1;

    // Group_v: one entry per data vertex, recording the children it matches.
    ChainGroups groups;
    std::vector<std::pair<int, NodeId>> entries;
    std::vector<std::vector<NodeId>> kept(kids.size());
    for (std::size_t k = 0; k < kids.size(); ++k) {
      for (NodeId w : cands[kids[k]]) {
        if (q.node(kids[k]).edge == EdgeType::PC) {
          bool ok = false;
          for (NodeId p : g.in(w)) ok = ok || mark[p];
          if (ok) kept[k].push_back(w);
          continue;
        }
        groups.add(idx, w, entries.size());
        entries.emplace_back(static_cast<int>(k), w);
      }
    }
    ReadScope scope(rc, visited);
    for (auto& [cid, list] : groups.chains) {
      std::sort(list.begin(), list.end());
      bool passed = false;
      for (const auto& [sid, y] : list) {
        if (!passed) passed = ReachIndex::above(cs, idx.pos(y), true);
        for (Vertex w = idx.lin(y).empty() ? idx.prev(y) : y; !passed && w != kNoVertex && scope.visit(w);
             w = idx.prev(w))
          for (const auto& p : idx.lin(w, &rc))
            if (ReachIndex::above(cs, p, false)) {
              passed = true;
              break;
            }
        // Higher positions on the chain are reached from this one.
        if (passed)
          for (std::size_t e : groups.members[y]) kept[entries[e].first].push_back(entries[e].second);
      }
    }
    const std::uint32_t worst = scope.finish();
    if (stats) stats->max_lin_per_parent = std::max(stats->max_lin_per_parent, worst);
    for (NodeId v : cands[u]) mark[v] = 0;
    for (std::size_t k = 0; k < kids.size(); ++k) {
      std::sort(kept[k].begin(), kept[k].end());
      cands[kids[k]] = std::move(kept[k]);
    }
  }
  if (stats) stats->lin_reads += rc.lin_total;
  return cands;
}

ShrunkPlan shrink_prime(const Query& q, const std::vector<int>& tree, const CandidateMap& cands) {
  ShrunkPlan plan;
  for (int u : tree)
    if (cands[u].empty()) {
      plan.empty = true;
      return plan;
    }
  const auto outs = q.outputs();
  if (outs.empty()) return plan;
  int top = outs.front();
  for (int o : outs) top = q.lca(top, o);

  std::vector<char> in_tree(q.size(), 0), removed(q.size(), 0);
  for (int u : tree) in_tree[u] = 1;
  for (int u : tree) {
    if (u != top && !q.is_ancestor(top, u)) {
      removed[u] = 1;
      continue;
    }
    if (cands[u].size() == 1) {
      removed[u] = 1;
      if (q.node(u).output) plan.fixed.emplace_back(u, cands[u][0]);
    }
  }
  for (int u : tree) {
    if (removed[u]) continue;
    const int p = q.parent(u);
    if (u != top && p >= 0 && !removed[p]) continue;
    std::vector<int> comp{u};
    for (std::size_t i = 0; i < comp.size(); ++i)
      for (int c : q.children(comp[i]))
        if (in_tree[c] && !removed[c]) comp.push_back(c);
    plan.components.push_back(std::move(comp));
  }
  return plan;
}

std::size_t MatchingGraph::node_count() const {
  std::size_t n = 0;
  for (const auto& a : alive)
    for (char c : a) n += c != 0;
  return n;
}

std::size_t MatchingGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& per_node : branch)
    for (const auto& lists : per_node)
      for (const auto& l : lists) n += l.size();
  return n;
}

MatchingGraph build_matching_graph(const ReachIndex& idx, const DataGraph&, const Query& q, const ShrunkPlan& plan,
                                   const CandidateMap& cands, bool pairwise) {
  MatchingGraph mg;
  mg.kids.assign(q.size(), {});
  mg.branch.assign(q.size(), {});
  mg.alive.assign(q.size(), {});
  for (const auto& comp : plan.components) {
    std::vector<char> member(q.size(), 0);
    for (int u : comp) member[u] = 1;
    for (int u : comp) {
      mg.alive[u].assign(cands[u].size(), 1);
      for (int c : q.children(u))
        if (member[c]) mg.kids[u].push_back(c);
      mg.branch[u].assign(cands[u].size(), std::vector<std::vector<std::uint32_t>>(mg.kids[u].size()));
    }
    for (int u : comp) {
      for (std::size_t k = 0; k < mg.kids[u].size(); ++k) {
        const auto& target = cands[mg.kids[u][k]];
        if (pairwise) {
          for (std::size_t i = 0; i < cands[u].size(); ++i)
            for (std::size_t j = 0; j < target.size(); ++j)
              if (idx.reaches(cands[u][i], target[j])) mg.branch[u][i][k].push_back(static_cast<std::uint32_t>(j));
          continue;
        }
        // Targets per chain in ascending position, so a reachable position
        // yields a suffix.
        std::unordered_map<std::uint32_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>> by_chain;
        for (std::size_t j = 0; j < target.size(); ++j) {
          const ChainPos p = idx.pos(idx.vertex_of(target[j]));
          by_chain[p.cid].emplace_back(p.sid, static_cast<std::uint32_t>(j));
        }
        for (auto& [_, l] : by_chain) std::sort(l.begin(), l.end());
        for (std::size_t i = 0; i < cands[u].size(); ++i) {
          const Vertex x = idx.vertex_of(cands[u][i]);
          const ChainPos own = idx.pos(x);
          auto& out = mg.branch[u][i][k];
          for (const auto& p : idx.x_list(x)) {
            auto it = by_chain.find(p.cid);
            if (it == by_chain.end()) continue;
            const bool self = p == own;
            for (auto e = std::lower_bound(it->second.begin(), it->second.end(), std::make_pair(p.sid, 0u));
                 e != it->second.end(); ++e) {
              if (self && e->first == own.sid && !idx.cyclic(x)) continue;
              out.push_back(e->second);
            }
          }
          std::sort(out.begin(), out.end());
        }
      }
    }
  }
  return mg;
}

std::size_t enforce_pc_edges(const DataGraph& g, const Query& q, const ShrunkPlan& plan, const CandidateMap& cands,
                             MatchingGraph& mg) {
  std::size_t dropped = 0;
  for (const auto& comp : plan.components)
    for (int u : comp)
      for (std::size_t k = 0; k < mg.kids[u].size(); ++k) {
        const int c = mg.kids[u][k];
        if (q.node(c).edge != EdgeType::PC) continue;
        for (std::size_t i = 0; i < cands[u].size(); ++i) {
          auto& l = mg.branch[u][i][k];
          const std::size_t before = l.size();
          l.erase(std::remove_if(l.begin(), l.end(), [&](std::uint32_t j) { return !g.has_edge(cands[u][i], cands[c][j]); }),
                  l.end());
          dropped += before - l.size();
        }
      }
  // A node needs a live target in every branch list; children settle first.
  for (const auto& comp : plan.components)
    for (auto it = comp.rbegin(); it != comp.rend(); ++it) {
      const int u = *it;
      for (std::size_t i = 0; i < cands[u].size(); ++i)
        for (std::size_t k = 0; k < mg.kids[u].size() && mg.alive[u][i]; ++k) {
          const auto& ok = mg.alive[mg.kids[u][k]];
          bool any = false;
          for (std::uint32_t j : mg.branch[u][i][k]) any = any || ok[j];
          if (!any) mg.alive[u][i] = 0;
        }
    }
  return dropped;
}

namespace {

using Row = GroupedResults::Row;

bool row_less(const Row& a, const Row& b) {
  return a.values != b.values ? a.values < b.values : a.groups < b.groups;
}
bool row_equal(const Row& a, const Row& b) { return a.values == b.values && a.groups == b.groups; }

void sort_rows(std::vector<Row>& rows) {
  std::sort(rows.begin(), rows.end(), row_less);
  rows.erase(std::unique(rows.begin(), rows.end(), row_equal), rows.end());
}

std::vector<Row> product(const std::vector<Row>& a, const std::vector<Row>& b) {
  std::vector<Row> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) {
      Row r = x;
      for (std::size_t i = 0; i < r.values.size(); ++i)
        if (y.values[i] != kUnboundNode) r.values[i] = y.values[i];
      r.groups.insert(r.groups.end(), y.groups.begin(), y.groups.end());
      out.push_back(std::move(r));
    }
  return out;
}

class Collector {
 public:
  Collector(const Query& q, const CandidateMap& cands, const MatchingGraph& mg, const EvalOptions& opt,
            GroupedResults& out)
      : q_(q), cands_(cands), mg_(mg), opt_(opt), out_(out), column_(q.size(), -1), group_(q.size(), 0) {
    for (std::size_t i = 0; i < out.columns.size(); ++i) column_[out.columns[i]] = static_cast<int>(i);
    for (int u = 0; u < q.size(); ++u) group_[u] = opt.group.count(q.id(u)) ? 1 : 0;
    memo_.resize(q.size());
    for (int u = 0; u < q.size(); ++u) memo_[u].resize(cands[u].size());
  }

  Row blank() const { return Row{std::vector<NodeId>(out_.columns.size(), kUnboundNode), {}}; }

  const std::vector<Row>& results(int u, std::uint32_t i) {
    auto& slot = memo_[u][i];
    if (slot) return *slot;
    std::vector<Row> acc{blank()};
    for (std::size_t k = 0; k < mg_.kids[u].size(); ++k) {
      const int c = mg_.kids[u][k];
      std::vector<Row> branch;
      for (std::uint32_t j : mg_.branch[u][i][k]) {
        if (!mg_.alive[c][j]) continue;
        const auto& r = results(c, j);
        branch.insert(branch.end(), r.begin(), r.end());
      }
      raw_ += branch.size();
      if (opt_.dedupe) sort_rows(branch);
      acc = product(acc, branch);
      if (acc.empty()) break;
    }
    const NodeId v = cands_[u][i];
    if (group_[u] && !acc.empty()) {
      for (auto& r : acc)
        if (column_[u] >= 0) r.values[column_[u]] = v;
      out_.groups.push_back(std::move(acc));
      Row r = blank();
      if (column_[u] >= 0) r.values[column_[u]] = v;
      r.groups.push_back(static_cast<std::uint32_t>(out_.groups.size() - 1));
      acc = {std::move(r)};
    } else if (column_[u] >= 0) {
      for (auto& r : acc) r.values[column_[u]] = v;
    }
    slot = std::make_shared<std::vector<Row>>(std::move(acc));
    return *slot;
  }

  std::size_t raw() const { return raw_; }

 private:
  const Query& q_;
  const CandidateMap& cands_;
  const MatchingGraph& mg_;
  const EvalOptions& opt_;
  GroupedResults& out_;
  std::vector<int> column_;
  std::vector<char> group_;
  std::vector<std::vector<std::shared_ptr<std::vector<Row>>>> memo_;
  std::size_t raw_ = 0;
};

void expand(const GroupedResults& gr, const Row& r, std::vector<std::vector<NodeId>>& out) {
  std::vector<Row> acc{Row{r.values, {}}};
  for (std::uint32_t gid : r.groups) {
    std::vector<Row> inner;
    for (const auto& nested : gr.groups[gid]) {
      std::vector<std::vector<NodeId>> flat;
      expand(gr, nested, flat);
      for (auto& f : flat) inner.push_back(Row{std::move(f), {}});
    }
    acc = product(acc, inner);
  }
  for (auto& a : acc) out.push_back(std::move(a.values));
}

}  // namespace

ResultSet GroupedResults::flatten() const {
  ResultSet rs;
  rs.columns = columns;
  for (const auto& r : rows) expand(*this, r, rs.rows);
  return rs;
}

GroupedResults collect_results(const Query& q, const ShrunkPlan& plan, const CandidateMap& cands,
                               const MatchingGraph& mg, const EvalOptions& options, EngineStats* stats) {
  GroupedResults out;
  out.columns = q.outputs();
  if (plan.empty) return out;
  Collector col(q, cands, mg, options, out);
  std::vector<Row> acc{col.blank()};
  for (const auto& comp : plan.components) {
    const int r = comp.front();
    std::vector<Row> here;
    for (std::uint32_t i = 0; i < cands[r].size(); ++i) {
      if (!mg.alive[r][i]) continue;
      const auto& part = col.results(r, i);
      here.insert(here.end(), part.begin(), part.end());
    }
    if (options.dedupe) sort_rows(here);
    acc = product(acc, here);
    if (acc.empty()) break;
  }
  for (auto& row : acc)
    for (const auto& [u, v] : plan.fixed)
      for (std::size_t i = 0; i < out.columns.size(); ++i)
        if (out.columns[i] == u) row.values[i] = v;
  if (stats) stats->raw_tuples = col.raw() + acc.size();
  out.rows = std::move(acc);
  return out;
}

GroupedResults evaluate_grouped(const DataGraph& g, const ReachIndex& idx, const Query& q, const EvalOptions& options,
                                EngineStats* stats) {
  EngineStats local;
  EngineStats& st = stats ? *stats : local;
  CandidateMap cands = initial_candidates(g, q);
  for (const auto& c : cands) st.initial.push_back(c.size());
  cands = prune_downward(idx, g, q, std::move(cands), &st);
  for (const auto& c : cands) st.after_downward.push_back(c.size());
  const auto tree = output_paths(q);
  cands = prune_upward(idx, g, q, tree, std::move(cands), &st);
  for (const auto& c : cands) st.after_upward.push_back(c.size());
  ShrunkPlan plan = shrink_prime(q, tree, cands);
  MatchingGraph mg = build_matching_graph(idx, g, q, plan, cands, options.pairwise_edges);
  st.pc_edges_removed = enforce_pc_edges(g, q, plan, cands, mg);
  st.graph_nodes = mg.node_count();
  st.graph_edges = mg.edge_count();
  return collect_results(q, plan, cands, mg, options, &st);
}

ResultSet evaluate(const DataGraph& g, const ReachIndex& idx, const Query& q, const EvalOptions& options,
                   EngineStats* stats) {
  ResultSet rs = evaluate_grouped(g, idx, q, options, stats).flatten();
  if (options.dedupe) rs.sort_unique();
  return rs;
}

}  // namespace gtea

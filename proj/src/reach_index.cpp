#include "gtea/reach_index.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

namespace gtea {

const ContourEntry* Contour::find(std::uint32_t cid) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), cid,
                             [](const ContourEntry& e, std::uint32_t c) { return e.cid < c; });
  return it != entries_.end() && it->cid == cid ? &*it : nullptr;
}

void ReadCounter::reset(std::size_t vertices) {
  lout.assign(vertices, 0);
  lin.assign(vertices, 0);
  lout_total = lin_total = 0;
}

std::uint32_t ReadCounter::max_lout() const {
  return lout.empty() ? 0 : *std::max_element(lout.begin(), lout.end());
}

std::uint32_t ReadCounter::max_lin() const {
  return lin.empty() ? 0 : *std::max_element(lin.begin(), lin.end());
}

namespace {

// Pointwise merge of two per-chain position lists sorted by cid.
template <bool Min>
void merge_into(std::vector<ChainPos>& acc, const std::vector<ChainPos>& add, ChainPos extra,
                std::vector<ChainPos>& scratch) {
  scratch.clear();
  scratch.reserve(acc.size() + add.size() + 1);
  auto better = [](std::uint32_t a, std::uint32_t b) { return Min ? std::min(a, b) : std::max(a, b); };
  std::size_t i = 0, j = 0;
  bool extra_done = false;
  while (i < acc.size() || j < add.size() || !extra_done) {
    std::uint32_t c = std::numeric_limits<std::uint32_t>::max();
    if (i < acc.size()) c = std::min(c, acc[i].cid);
    if (j < add.size()) c = std::min(c, add[j].cid);
    if (!extra_done) c = std::min(c, extra.cid);
    bool have = false;
    std::uint32_t s = 0;
    auto take = [&](std::uint32_t v) {
      s = have ? better(s, v) : v;
      have = true;
    };
    if (i < acc.size() && acc[i].cid == c) take(acc[i++].sid);
    if (j < add.size() && add[j].cid == c) take(add[j++].sid);
    if (!extra_done && extra.cid == c) {
      take(extra.sid);
      extra_done = true;
    }
    scratch.push_back({c, s});
  }
  acc.swap(scratch);
}

const ChainPos* lookup(const std::vector<ChainPos>& l, std::uint32_t cid) {
  auto it = std::lower_bound(l.begin(), l.end(), cid, [](const ChainPos& p, std::uint32_t c) { return p.cid < c; });
  return it != l.end() && it->cid == cid ? &*it : nullptr;
}

}  // namespace

void ReachIndex::assign_cover(const DataGraph& g, const Condensation& c, std::vector<std::vector<Vertex>> chains) {
  const std::size_t n = c.size();
  comp_ = c.comp;
  cyclic_ = c.cyclic;
  rep_.resize(n);
  rep_ids_.resize(n);
  for (Vertex x = 0; x < n; ++x) {
    rep_[x] = c.members[x].front();
    rep_ids_[x] = g.id(rep_[x]);
  }
  pos_.assign(n, ChainPos{std::numeric_limits<std::uint32_t>::max(), 0});
  for (std::uint32_t cid = 0; cid < chains.size(); ++cid) {
    if (chains[cid].empty()) throw InputError("empty chain " + std::to_string(cid));
    for (std::uint32_t sid = 0; sid < chains[cid].size(); ++sid) {
      const Vertex x = chains[cid][sid];
      if (pos_[x].cid != std::numeric_limits<std::uint32_t>::max())
        throw InputError("node '" + rep_ids_[x] + "' appears on more than one chain");
      pos_[x] = {cid, sid};
      if (sid > 0 && chains[cid][sid - 1] >= x)
        throw InputError("chain " + std::to_string(cid) + " is not ordered by reachability at '" + rep_ids_[x] + "'");
    }
  }
  for (Vertex x = 0; x < n; ++x)
    if (pos_[x].cid == std::numeric_limits<std::uint32_t>::max())
      throw InputError("node '" + rep_ids_[x] + "' is not covered by any chain");
  chains_ = std::move(chains);
}

void ReachIndex::compute_lists(const Condensation& c) {
  const std::size_t n = c.size();
  lout_.assign(n, {});
  lin_.assign(n, {});
  std::vector<ChainPos> scratch;

  // Full per-chain closures are kept only while some vertex still needs them.
  auto chain_next = [&](Vertex x) -> Vertex {
    const auto& ch = chains_[pos_[x].cid];
    return pos_[x].sid + 1 < ch.size() ? ch[pos_[x].sid + 1] : kNoVertex;
  };
  auto chain_prev = [&](Vertex x) -> Vertex {
    return pos_[x].sid > 0 ? chains_[pos_[x].cid][pos_[x].sid - 1] : kNoVertex;
  };

  {
    std::vector<std::vector<ChainPos>> full(n);
    std::vector<std::uint32_t> refs(n, 0);
    for (Vertex x = 0; x < n; ++x) refs[x] = static_cast<std::uint32_t>(c.in[x].size()) + (chain_prev(x) != kNoVertex);
    auto release = [&](Vertex x) {
      if (--refs[x] == 0) std::vector<ChainPos>().swap(full[x]);
    };
    for (Vertex x = static_cast<Vertex>(n); x-- > 0;) {
      std::vector<ChainPos> acc;
      for (Vertex w : c.out[x]) merge_into<true>(acc, full[w], pos_[w], scratch);
      const Vertex s = chain_next(x);
      const std::uint32_t own = pos_[x].cid;
      for (const auto& e : acc) {
        if (e.cid == own) continue;
        if (s != kNoVertex) {
          const ChainPos* d = lookup(full[s], e.cid);
          const bool at_s = pos_[s].cid == e.cid && pos_[s].sid <= e.sid;
          if ((d && d->sid <= e.sid) || at_s) continue;
        }
        lout_[x].push_back(e);
      }
      full[x] = std::move(acc);
      for (Vertex w : c.out[x]) release(w);
      if (s != kNoVertex) release(s);
      if (refs[x] == 0) std::vector<ChainPos>().swap(full[x]);
    }
  }
  {
    std::vector<std::vector<ChainPos>> full(n);
    std::vector<std::uint32_t> refs(n, 0);
    for (Vertex x = 0; x < n; ++x) refs[x] = static_cast<std::uint32_t>(c.out[x].size()) + (chain_next(x) != kNoVertex);
    auto release = [&](Vertex x) {
      if (--refs[x] == 0) std::vector<ChainPos>().swap(full[x]);
    };
    for (Vertex x = 0; x < n; ++x) {
      std::vector<ChainPos> acc;
      for (Vertex w : c.in[x]) merge_into<false>(acc, full[w], pos_[w], scratch);
      const Vertex p = chain_prev(x);
      const std::uint32_t own = pos_[x].cid;
      for (const auto& e : acc) {
        if (e.cid == own) continue;
        if (p != kNoVertex) {
          const ChainPos* d = lookup(full[p], e.cid);
          const bool at_p = pos_[p].cid == e.cid && pos_[p].sid >= e.sid;
          if ((d && d->sid >= e.sid) || at_p) continue;
        }
        lin_[x].push_back(e);
      }
      full[x] = std::move(acc);
      for (Vertex w : c.in[x]) release(w);
      if (p != kNoVertex) release(p);
      if (refs[x] == 0) std::vector<ChainPos>().swap(full[x]);
    }
  }
}

void ReachIndex::link() {
  const std::size_t n = pos_.size();
  next_.assign(n, kNoVertex);
  prev_.assign(n, kNoVertex);
  lout_nonempty_ = lin_nonempty_ = 0;
  for (const auto& ch : chains_) {
    Vertex after = kNoVertex;
    for (std::size_t i = ch.size(); i-- > 0;) {
      next_[ch[i]] = after;
      if (!lout_[ch[i]].empty()) after = ch[i];
    }
    Vertex before = kNoVertex;
    for (Vertex x : ch) {
      prev_[x] = before;
      if (!lin_[x].empty()) before = x;
    }
  }
  for (Vertex x = 0; x < n; ++x) {
    lout_nonempty_ += !lout_[x].empty();
    lin_nonempty_ += !lin_[x].empty();
  }
}

ReachIndex ReachIndex::build(const DataGraph& g) {
  const Condensation c = condense(g);
  std::vector<std::vector<Vertex>> chains;
  std::vector<char> taken(c.size(), 0);
  for (Vertex x = 0; x < c.size(); ++x) {
    if (taken[x]) continue;
    std::vector<Vertex> ch;
    Vertex cur = x;
    while (cur != kNoVertex) {
      taken[cur] = 1;
      ch.push_back(cur);
      Vertex nxt = kNoVertex;
      for (Vertex w : c.out[cur]) {
        if (!taken[w]) {
          nxt = w;
          break;
        }
      }
      cur = nxt;
    }
    chains.push_back(std::move(ch));
  }
  ReachIndex idx;
  idx.assign_cover(g, c, std::move(chains));
  idx.compute_lists(c);
  idx.link();
  return idx;
}

static std::vector<std::vector<Vertex>> resolve_chains(const DataGraph& g, const Condensation& c,
                                                       const std::vector<std::vector<std::string>>& chains) {
  std::vector<std::vector<Vertex>> out;
  for (const auto& ch : chains) {
    std::vector<Vertex> row;
    for (const auto& id : ch) {
      auto v = g.find(id);
      if (!v) throw InputError("chain references unknown node '" + id + "'");
      row.push_back(c.comp[*v]);
    }
    out.push_back(std::move(row));
  }
  return out;
}

// Consecutive chain members must be connected by a path in the condensed DAG.
static void check_chain_paths(const Condensation& c, const std::vector<std::vector<Vertex>>& chains) {
  std::vector<std::uint32_t> mark(c.size(), 0);
  std::uint32_t stamp = 0;
  std::vector<Vertex> stack;
  for (const auto& ch : chains) {
    for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
      const Vertex from = ch[i], to = ch[i + 1];
      ++stamp;
      stack.assign(1, from);
      bool found = false;
      while (!stack.empty() && !found) {
        const Vertex x = stack.back();
        stack.pop_back();
        for (Vertex w : c.out[x]) {
          if (w == to) {
            found = true;
            break;
          }
          if (w < to && mark[w] != stamp) {
            mark[w] = stamp;
            stack.push_back(w);
          }
        }
      }
      if (!found) throw InputError("chain has consecutive members without a connecting path");
    }
  }
}

ReachIndex ReachIndex::build(const DataGraph& g, const std::vector<std::vector<std::string>>& chains) {
  const Condensation c = condense(g);
  auto resolved = resolve_chains(g, c, chains);
  ReachIndex idx;
  idx.assign_cover(g, c, std::move(resolved));
  check_chain_paths(c, idx.chains_);
  idx.compute_lists(c);
  idx.link();
  return idx;
}

ReachIndex ReachIndex::from_json(const DataGraph& g, const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("index JSON must be an object");
  if (j.value("version", 0) != 1) throw InputError("unsupported index version");
  if (!j.contains("chains") || !j["chains"].is_array()) throw InputError("index JSON needs \"chains\"");
  std::vector<std::vector<std::string>> chains;
  for (const auto& ch : j["chains"]) {
    if (!ch.is_array()) throw InputError("each chain must be an array of node ids");
    std::vector<std::string> row;
    for (const auto& id : ch) {
      if (!id.is_string()) throw InputError("chain members must be node id strings");
      row.push_back(id.get<std::string>());
    }
    chains.push_back(std::move(row));
  }
  const Condensation c = condense(g);
  ReachIndex idx;
  idx.assign_cover(g, c, resolve_chains(g, c, chains));
  check_chain_paths(c, idx.chains_);
  idx.lout_.assign(c.size(), {});
  idx.lin_.assign(c.size(), {});
  for (const char* key : {"lout", "lin"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_object()) throw InputError(std::string("\"") + key + "\" must be an object");
    auto& lists = key[1] == 'o' ? idx.lout_ : idx.lin_;
    for (const auto& [id, entries] : j[key].items()) {
      auto v = g.find(id);
      if (!v) throw InputError(std::string(key) + " references unknown node '" + id + "'");
      const Vertex x = c.comp[*v];
      auto& l = lists[x];
      for (const auto& e : entries) {
        if (!e.is_object() || !e.contains("cid") || !e.contains("sid"))
          throw InputError("list entries need \"cid\" and \"sid\"");
        const auto cid = e["cid"].get<std::uint32_t>();
        const auto sid = e["sid"].get<std::uint32_t>();
        if (cid >= idx.chains_.size() || sid >= idx.chains_[cid].size())
          throw InputError("list entry outside the chain cover at '" + id + "'");
        if (cid == idx.pos_[x].cid) throw InputError("list entry on the node's own chain at '" + id + "'");
        l.push_back({cid, sid});
      }
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end(), [](const ChainPos& a, const ChainPos& b) { return a.cid == b.cid; }),
              l.end());
    }
  }
  idx.link();

  // Small indexes are checked against the condensed graph's closure.
  if (c.size() <= 2000) {
    for (Vertex a = 0; a < c.size(); ++a) {
      std::vector<char> seen(c.size(), 0);
      std::vector<Vertex> stack(c.out[a].begin(), c.out[a].end());
      for (Vertex w : stack) seen[w] = 1;
      while (!stack.empty()) {
        const Vertex x = stack.back();
        stack.pop_back();
        for (Vertex w : c.out[x])
          if (!seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
      }
      for (Vertex b = 0; b < c.size(); ++b)
        if (idx.vertex_reaches(a, b) != (seen[b] != 0))
          throw InputError("index lists disagree with the graph for '" + idx.rep_ids_[a] + "' and '" +
                           idx.rep_ids_[b] + "'");
    }
  }
  return idx;
}

ReachIndex ReachIndex::load(const DataGraph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open index file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed index JSON in '" + path + "': " + e.what());
  }
  return from_json(g, j);
}

nlohmann::json ReachIndex::to_json() const {
  nlohmann::json chains = nlohmann::json::array();
  for (const auto& ch : chains_) {
    nlohmann::json row = nlohmann::json::array();
    for (Vertex x : ch) row.push_back(rep_ids_[x]);
    chains.push_back(row);
  }
  auto lists = [&](const std::vector<std::vector<ChainPos>>& ls) {
    nlohmann::json out = nlohmann::json::object();
    for (Vertex x = 0; x < ls.size(); ++x) {
      if (ls[x].empty()) continue;
      nlohmann::json row = nlohmann::json::array();
      for (const auto& e : ls[x]) row.push_back({{"cid", e.cid}, {"sid", e.sid}});
      out[rep_ids_[x]] = row;
    }
    return out;
  };
  return {{"version", 1}, {"chains", chains}, {"lout", lists(lout_)}, {"lin", lists(lin_)}};
}

std::size_t ReachIndex::lout_entries() const {
  std::size_t n = 0;
  for (const auto& l : lout_) n += l.size();
  return n;
}

std::size_t ReachIndex::lin_entries() const {
  std::size_t n = 0;
  for (const auto& l : lin_) n += l.size();
  return n;
}

std::span<const ChainPos> ReachIndex::lout(Vertex x, ReadCounter* rc) const {
  if (rc && !lout_[x].empty()) {
    ++rc->lout[x];
    ++rc->lout_total;
  }
  return lout_[x];
}

std::span<const ChainPos> ReachIndex::lin(Vertex x, ReadCounter* rc) const {
  if (rc && !lin_[x].empty()) {
    ++rc->lin[x];
    ++rc->lin_total;
  }
  return lin_[x];
}

std::vector<ChainPos> ReachIndex::x_list(Vertex x) const {
  std::vector<ChainPos> out{pos_[x]};
  for (Vertex w = lout_[x].empty() ? next_[x] : x; w != kNoVertex; w = next_[w])
    out.insert(out.end(), lout_[w].begin(), lout_[w].end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](const ChainPos& a, const ChainPos& b) { return a.cid == b.cid; }),
            out.end());
  return out;
}

std::vector<ChainPos> ReachIndex::y_list(Vertex x) const {
  std::vector<ChainPos> out{pos_[x]};
  for (Vertex w = lin_[x].empty() ? prev_[x] : x; w != kNoVertex; w = prev_[w])
    out.insert(out.end(), lin_[w].begin(), lin_[w].end());
  std::sort(out.begin(), out.end(), [](const ChainPos& a, const ChainPos& b) {
    return a.cid != b.cid ? a.cid < b.cid : a.sid > b.sid;
  });
  out.erase(std::unique(out.begin(), out.end(), [](const ChainPos& a, const ChainPos& b) { return a.cid == b.cid; }),
            out.end());
  return out;
}

bool ReachIndex::vertex_reaches(Vertex a, Vertex b) const {
  if (a == b) return false;
  const auto xs = x_list(a), ys = y_list(b);
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    if (xs[i].cid < ys[j].cid) {
      ++i;
    } else if (xs[i].cid > ys[j].cid) {
      ++j;
    } else {
      if (xs[i].sid <= ys[j].sid) return true;
      ++i;
      ++j;
    }
  }
  return false;
}

bool ReachIndex::reaches(NodeId a, NodeId b) const {
  const Vertex ca = comp_[a], cb = comp_[b];
  if (ca == cb) return cyclic_[ca] != 0;
  return vertex_reaches(ca, cb);
}

namespace {

void settle(std::unordered_map<std::uint32_t, ContourEntry>& m, std::uint32_t cid, std::uint32_t sid, bool open,
            bool keep_max) {
  auto [it, fresh] = m.try_emplace(cid, ContourEntry{cid, sid, open});
  if (fresh) return;
  ContourEntry& e = it->second;
  if (e.sid == sid) {
    e.open = e.open || open;
  } else if (keep_max ? sid > e.sid : sid < e.sid) {
    e.sid = sid;
    e.open = open;
  }
}

}  // namespace

Contour ReachIndex::pred_contour(std::span<const NodeId> nodes, ReadCounter* rc) const {
  // Per chain, the highest member dominates the entry lists of all lower ones.
  std::unordered_map<std::uint32_t, ContourEntry> top;
  for (NodeId v : nodes) {
    const Vertex x = comp_[v];
    settle(top, pos_[x].cid, pos_[x].sid, cyclic_[x] != 0, true);
  }
  std::unordered_map<std::uint32_t, ContourEntry> m = top;
  for (const auto& [cid, e] : top) {
    const Vertex x = chains_[cid][e.sid];
    for (Vertex w = lin_[x].empty() ? prev_[x] : x; w != kNoVertex; w = prev_[w])
      for (const auto& p : lin(w, rc)) settle(m, p.cid, p.sid, true, true);
  }
  Contour c;
  for (const auto& [_, e] : m) c.entries_.push_back(e);
  std::sort(c.entries_.begin(), c.entries_.end(), [](const auto& a, const auto& b) { return a.cid < b.cid; });
  return c;
}

Contour ReachIndex::succ_contour(std::span<const NodeId> nodes, ReadCounter* rc) const {
  std::unordered_map<std::uint32_t, ContourEntry> low;
  for (NodeId v : nodes) {
    const Vertex x = comp_[v];
    settle(low, pos_[x].cid, pos_[x].sid, cyclic_[x] != 0, false);
  }
  std::unordered_map<std::uint32_t, ContourEntry> m = low;
  for (const auto& [cid, e] : low) {
    const Vertex x = chains_[cid][e.sid];
    for (Vertex w = lout_[x].empty() ? next_[x] : x; w != kNoVertex; w = next_[w])
      for (const auto& p : lout(w, rc)) settle(m, p.cid, p.sid, true, false);
  }
  Contour c;
  for (const auto& [_, e] : m) c.entries_.push_back(e);
  std::sort(c.entries_.begin(), c.entries_.end(), [](const auto& a, const auto& b) { return a.cid < b.cid; });
  return c;
}

bool ReachIndex::below(const Contour& pred, ChainPos x, bool own) {
  const ContourEntry* e = pred.find(x.cid);
  if (!e) return false;
  return e->sid > x.sid || (e->sid == x.sid && (!own || e->open));
}

bool ReachIndex::above(const Contour& succ, ChainPos y, bool own) {
  const ContourEntry* e = succ.find(y.cid);
  if (!e) return false;
  return e->sid < y.sid || (e->sid == y.sid && (!own || e->open));
}

bool ReachIndex::reaches_set(NodeId v, const Contour& pred) const {
  const Vertex x = comp_[v];
  for (const auto& p : x_list(x))
    if (below(pred, p, p == pos_[x])) return true;
  return false;
}

bool ReachIndex::set_reaches(const Contour& succ, NodeId v) const {
  const Vertex x = comp_[v];
  for (const auto& p : y_list(x))
    if (above(succ, p, p == pos_[x])) return true;
  return false;
}

}  // namespace gtea

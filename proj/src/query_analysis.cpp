#include <algorithm>
#include <set>

#include "embedding.hpp"
#include "gtea/analysis.hpp"
#include "gtea/oracle.hpp"

namespace gtea {

namespace {

void collect_polarity(const Formula& f, bool positive, std::map<std::string, int>& seen) {
  switch (f.kind()) {
    case Formula::Kind::Var:
      seen[f.name()] |= positive ? 1 : 2;
      break;
    case Formula::Kind::Not:
      collect_polarity(f.operands()[0], !positive, seen);
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      for (const auto& g : f.operands()) collect_polarity(g, positive, seen);
      break;
    default:
      break;
  }
}

}  // namespace

bool attr_implies(const QueryNode& u2, const QueryNode& u1) { return u2.attr.implies(u1.attr); }

QueryAnalysis::QueryAnalysis(Query q) : q_(std::move(q)) {
  const int n = q_.size();
  ind_.assign(n, 0);
  attr_sat_.assign(n, 0);
  pol_.assign(n, Polarity::Positive);
  ftr_.assign(n, Formula::constant(true));
  pairs_.assign(n, std::nullopt);
  closure_.assign(n, std::nullopt);

  for (int u = 0; u < n; ++u) attr_sat_[u] = q_.node(u).attr.satisfiable() ? 1 : 0;
  for (int u : q_.top_down()) {
    const int p = q_.parent(u);
    if (p < 0) {
      ind_[u] = is_sat(q_.node(u).structural) ? 1 : 0;
      continue;
    }
    ind_[u] = ind_[p] && is_essential(q_.extended(p), q_.id(u)) && is_sat(q_.node(u).structural) ? 1 : 0;
  }
  for (int u = 0; u < n; ++u) {
    std::map<std::string, int> seen;
    collect_polarity(q_.node(u).structural, true, seen);
    for (int c : q_.children(u)) {
      if (q_.node(c).backbone()) continue;
      const int s = seen.count(q_.id(c)) ? seen[q_.id(c)] : 1;
      pol_[c] = s == 1 ? Polarity::Positive : s == 2 ? Polarity::Negative : Polarity::Mixed;
    }
  }
  for (int u : q_.bottom_up()) {
    Formula ext = q_.extended(u);
    if (!ind_[u] || q_.children(u).empty()) {
      ftr_[u] = ext;
      continue;
    }
    std::map<std::string, Formula> sub;
    for (int c : q_.children(u))
      sub.emplace(q_.id(c), ind_[c] ? Formula::conj(Formula::var(q_.id(c)), ftr_[c]) : Formula::constant(false));
    ftr_[u] = substitute(ext, sub);
  }
}

std::vector<int> QueryAnalysis::independent_nodes() const {
  std::vector<int> out;
  for (int u = 0; u < q_.size(); ++u)
    if (ind_[u]) out.push_back(u);
  return out;
}

Formula QueryAnalysis::zero_dead(const Formula& f, int u) const {
  std::map<std::string, Formula> sub;
  for (int d : q_.subtree(u))
    if (d != u && !attr_sat_[d]) sub.emplace(q_.id(d), Formula::constant(false));
  return sub.empty() ? f : substitute(f, sub);
}

const std::vector<std::pair<int, int>>& QueryAnalysis::pairs_at(int lca) const {
  if (pairs_[lca]) return *pairs_[lca];
  std::vector<std::pair<int, int>> found;
  const auto below = q_.subtree(lca);
  for (int s : q_.children(lca)) {
    if (!relevant(s)) continue;
    for (int t : below)
      if (subsumed(s, t)) found.emplace_back(s, t);
  }
  pairs_[lca] = std::move(found);
  return *pairs_[lca];
}

Formula QueryAnalysis::pair_clauses(int lca) const {
  std::vector<Formula> ops;
  for (const auto& [s, t] : pairs_at(lca))
    ops.push_back(
        Formula::disj(Formula::negate(Formula::var(q_.id(t))), Formula::conj(Formula::var(q_.id(s)), ftr_[s])));
  return Formula::conj(std::move(ops));
}

Formula QueryAnalysis::complete(int u) const { return zero_dead(Formula::conj(ftr_[u], pair_clauses(u)), u); }

Formula QueryAnalysis::closure(int u) const {
  if (closure_[u]) return *closure_[u];
  std::vector<Formula> ops{ftr_[u]};
  for (int w : q_.subtree(u)) ops.push_back(pair_clauses(w));
  closure_[u] = zero_dead(Formula::conj(std::move(ops)), u);
  return *closure_[u];
}

std::optional<NodeMap> QueryAnalysis::similar(int u1, int u2) const {
  if (!relevant(u1) || !relevant(u2)) return std::nullopt;
  detail::Embedder e(*this, *this, false);
  const auto& alts = e.positive(u1, u2);
  if (alts.empty()) return std::nullopt;
  return alts.front();
}

bool QueryAnalysis::subsumed(int u1, int u2) const {
  if (u1 == u2 || q_.parent(u1) < 0 || q_.parent(u2) < 0) return false;
  const int p = q_.parent(u1);
  if (!q_.is_ancestor(p, u2) || q_.lca(u1, u2) != p) return false;
  if (q_.node(u1).edge == EdgeType::PC && (q_.parent(u2) != p || q_.node(u2).edge != EdgeType::PC)) return false;
  return similar(u1, u2).has_value();
}

std::vector<std::pair<int, int>> QueryAnalysis::subsumption_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int w : q_.top_down()) {
    const auto& p = pairs_at(w);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

bool QueryAnalysis::forced_true(int u) const {
  auto it = forced_t_.find(u);
  if (it != forced_t_.end()) return it->second;
  const bool r = is_tautology(Formula::implies(closure(q_.root()), Formula::var(q_.id(u))));
  forced_t_[u] = r;
  return r;
}

bool QueryAnalysis::forced_false(int u) const {
  auto it = forced_f_.find(u);
  if (it != forced_f_.end()) return it->second;
  const bool r = is_tautology(Formula::implies(closure(q_.root()), Formula::negate(Formula::var(q_.id(u)))));
  forced_f_[u] = r;
  return r;
}

bool QueryAnalysis::trivial(int u) const {
  auto it = trivial_.find(u);
  if (it != trivial_.end()) return it->second;
  std::vector<Formula> ops;
  for (int w : q_.subtree(u)) ops.push_back(pair_clauses(w));
  const bool r = is_tautology(zero_dead(Formula::implies(Formula::conj(std::move(ops)), ftr_[u]), u));
  trivial_[u] = r;
  return r;
}

bool QueryAnalysis::satisfiable() const {
  if (!attr_sat_[q_.root()]) return false;
  const bool all_attrs = std::all_of(attr_sat_.begin(), attr_sat_.end(), [](char c) { return c != 0; });
  if (all_attrs && q_.classify() != QueryClass::General) return true;
  return is_sat(closure(q_.root()));
}

namespace {

enum class Loops { None, Leaves, All };

// Witness graph under construction; materialized for each oracle check.
class WitnessBuilder {
 public:
  WitnessBuilder(const QueryAnalysis& qa, Loops loops, bool subdivide, bool acyclic)
      : qa_(qa), q_(qa.query()), loops_(loops), subdivide_(subdivide), acyclic_(acyclic), image_(q_.size(), kNone) {}

  void grow_main(const Assignment& model) { grow(q_.root(), model, &image_); }

  DataGraph build() const {
    DataGraph g;
    for (std::size_t i = 0; i < attrs_.size(); ++i) g.add_node("w" + std::to_string(i), attrs_[i]);
    for (const auto& [a, b] : edges_) g.add_edge(a, b);
    g.finalize();
    return g;
  }

  // Breaks accidental matches of predicates the intended embedding leaves
  // false, by growing the children that refute them. False when stuck.
  bool repair(const DataGraph& g) {
    if (g.size() > kMaxNodes) return false;
    ClosureMatrix cm(g);
    const auto down = oracle_downward_match(g, cm, q_);
    for (int u : q_.bottom_up()) {
      const NodeId v = image_[u];
      if (v == kNone || down[u][v]) continue;
      bool grafted = false;
      for (int c : q_.children(u)) {
        if (image_[c] != kNone) continue;
        for (NodeId w : related(g, cm, v, q_.node(c).edge))
          if (down[c][w]) grafted = refute(g, cm, down, c, w) || grafted;
      }
      return grafted;
    }
    return false;
  }

 private:
  static constexpr NodeId kNone = static_cast<NodeId>(-1);
  static constexpr std::size_t kMaxNodes = 500;

  std::vector<NodeId> related(const DataGraph& g, const ClosureMatrix& cm, NodeId v, EdgeType e) const {
    std::vector<NodeId> out;
    if (e == EdgeType::PC) return {g.out(v).begin(), g.out(v).end()};
    for (NodeId w = 0; w < g.size(); ++w)
      if (cm.reaches(v, w)) out.push_back(w);
    return out;
  }

  bool refute(const DataGraph& g, const ClosureMatrix& cm, const std::vector<std::vector<char>>& down, int c, NodeId w) {
    const auto& kids = q_.children(c);
    if (kids.empty() || kids.size() > 12) return false;
    Assignment cur;
    std::vector<int> off;
    for (int d : kids) {
      bool on = false;
      for (NodeId x : related(g, cm, w, q_.node(d).edge)) on = on || down[d][x];
      cur[q_.id(d)] = on;
      if (!on) off.push_back(d);
    }
    const Formula f = q_.extended(c);
    std::vector<unsigned> masks(1u << off.size());
    for (unsigned m = 0; m < masks.size(); ++m) masks[m] = m;
    std::stable_sort(masks.begin(), masks.end(),
                     [](unsigned a, unsigned b) { return __builtin_popcount(a) < __builtin_popcount(b); });
    for (unsigned m : masks) {
      if (m == 0) continue;
      Assignment a = cur;
      for (std::size_t i = 0; i < off.size(); ++i)
        if (m >> i & 1) a[q_.id(off[i])] = true;
      if (evaluate(f, a)) continue;
      // Each child comes from an existing match when there is one, which
      // may close a cycle, and is grown otherwise.
      std::vector<std::pair<int, NodeId>> links;
      std::vector<std::pair<int, Assignment>> parts;
      bool ok = true;
      for (std::size_t i = 0; i < off.size() && ok; ++i) {
        if (!(m >> i & 1)) continue;
        const int d = off[i];
        NodeId x = kNone;
        for (NodeId y = 0; y < g.size() && x == kNone; ++y)
          if (down[d][y] && (!acyclic_ || (y != w && !cm.reaches(y, w)))) x = y;
        if (x != kNone) {
          links.emplace_back(d, x);
          continue;
        }
        Assignment model;
        ok = qa_.relevant(d) && find_model(Formula::conj(qa_.closure(d), Formula::var(q_.id(d))), model);
        parts.emplace_back(d, std::move(model));
      }
      if (!ok) continue;
      for (const auto& [d, x] : links) edges_.emplace_back(w, x);
      for (auto& [d, model] : parts) edges_.emplace_back(w, grow(d, model, nullptr));
      return true;
    }
    return false;
  }

  bool value(const Assignment& model, int u) const {
    auto it = model.find(q_.id(u));
    return it != model.end() && it->second;
  }

  bool holds(const Assignment& model, const Formula& f) const {
    Assignment a;
    for (const auto& v : f.variables()) {
      auto it = model.find(v);
      a[v] = it != model.end() && it->second;
    }
    return evaluate(f, a);
  }

  const Attributes& attrs_for(int u) {
    auto it = attr_cache_.find(u);
    if (it != attr_cache_.end()) return it->second;
    AttributePredicate mine = u >= 0 ? q_.node(u).attr : AttributePredicate{};
    std::vector<AttributePredicate> avoid;
    for (bool negated : {true, false})
      for (int w = 0; w < q_.size(); ++w)
        if (w != u && !mine.implies(q_.node(w).attr) && (qa_.polarity(w) != Polarity::Positive) == negated)
          avoid.push_back(q_.node(w).attr);
    // Reject as many foreign predicates as the attribute domain allows,
    // negated ones first.
    std::vector<AttributePredicate> kept;
    std::optional<Attributes> best = find_attributes(mine, {});
    for (const auto& p : avoid) {
      kept.push_back(p);
      auto attempt = find_attributes(mine, kept);
      if (attempt) {
        best = std::move(attempt);
      } else {
        kept.pop_back();
      }
    }
    return attr_cache_[u] = best.value_or(Attributes{});
  }

  NodeId add(int u) {
    attrs_.push_back(attrs_for(u));
    return static_cast<NodeId>(attrs_.size() - 1);
  }

  // Adds the included part of subtree(top) and returns the image of top.
  NodeId grow(int top, const Assignment& model, std::vector<NodeId>* image) {
    std::map<int, NodeId> at;
    std::vector<int> order{top};
    at[top] = add(top);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const int u = order[i];
      for (int c : q_.children(u)) {
        if (!qa_.relevant(c) || !value(model, c) || !holds(model, qa_.transitive(c))) continue;
        at[c] = add(c);
        order.push_back(c);
        if (subdivide_ && q_.node(c).edge == EdgeType::AD) {
          const NodeId mid = add(-1);
          edges_.emplace_back(at[u], mid);
          edges_.emplace_back(mid, at[c]);
        } else {
          edges_.emplace_back(at[u], at[c]);
        }
      }
    }
    // Nodes on a cycle have themselves as descendants, which some negated
    // children require.
    if (loops_ != Loops::None)
      for (const auto& [u, v] : at) {
        bool leaf = true;
        for (int c : q_.children(u)) leaf = leaf && !at.count(c);
        if (loops_ == Loops::All || leaf) edges_.emplace_back(v, v);
      }
    if (image)
      for (const auto& [u, v] : at) (*image)[u] = v;
    return at[top];
  }

  const QueryAnalysis& qa_;
  const Query& q_;
  Loops loops_;
  bool subdivide_;
  // Grafts never close a cycle.
  bool acyclic_;
  std::vector<NodeId> image_;
  std::vector<Attributes> attrs_;
  std::vector<std::pair<NodeId, NodeId>> edges_;
  std::map<int, Attributes> attr_cache_;
};

}  // namespace

DataGraph QueryAnalysis::witness_graph() const {
  if (!satisfiable()) throw QueryError("witness graph requested for an unsatisfiable query");
  Formula f = closure(q_.root());
  std::optional<DataGraph> last;
  for (int attempt = 0; attempt < 64; ++attempt) {
    Assignment model;
    if (!find_model(f, model)) break;
    for (bool acyclic : {false, true})
      for (bool subdivide : {false, true})
        for (Loops l : {Loops::None, Loops::Leaves, Loops::All}) {
        WitnessBuilder b(*this, l, subdivide, acyclic);
        b.grow_main(model);
        for (int round = 0; round < 12; ++round) {
          DataGraph g = b.build();
          if (!oracle_evaluate(g, q_).empty()) return g;
          if (!last) last = g;
          if (!b.repair(g)) break;
        }
      }
    std::vector<Formula> lits;
    for (const auto& [v, b] : model) lits.push_back(b ? Formula::var(v) : Formula::negate(Formula::var(v)));
    if (lits.empty()) break;
    f = Formula::conj(f, Formula::negate(Formula::conj(std::move(lits))));
  }
  if (!last) {
    WitnessBuilder b(*this, Loops::None, false, false);
    b.grow_main({});
    last = b.build();
  }
  return std::move(*last);
}

}  // namespace gtea

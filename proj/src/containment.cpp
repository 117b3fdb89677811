#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

#include "embedding.hpp"
#include "gtea/analysis.hpp"

namespace gtea {

namespace detail {

bool equivalent_formulas(const Formula& x, const Formula& y) {
  return x == y || is_tautology(Formula::conj(Formula::implies(x, y), Formula::implies(y, x)));
}

Formula live_extended(const QueryAnalysis& qa, int u) {
  const Query& q = qa.query();
  std::map<std::string, Formula> sub;
  for (int c : q.children(u))
    if (!qa.relevant(c)) sub.emplace(q.id(c), Formula::constant(false));
  Formula f = q.extended(u);
  return sub.empty() ? f : substitute(f, sub);
}

Embedder::Embedder(const QueryAnalysis& a, const QueryAnalysis& b, bool outputs)
    : a_(a), b_(b), outputs_(outputs), above_(a.query().size(), 0) {
  const Query& q = a_.query();
  for (int o : q.outputs())
    for (int p = o; p >= 0; p = q.parent(p)) above_[p] = 1;
}

Formula Embedder::image(const Formula& f, const NodeMap& m) const {
  std::map<std::string, Formula> sub;
  for (const auto& v : f.variables()) {
    const int x = a_.query().index_of(v);
    auto it = m.find(x);
    sub.emplace(v, it == m.end() || it->second < 0 ? Formula::constant(false) : Formula::var(b_.query().id(it->second)));
  }
  return substitute(f, sub);
}

Formula Embedder::image_tr(int x, const NodeMap& m) const {
  const Query& qa = a_.query();
  const Query& qb = b_.query();
  std::map<std::string, Formula> sub;
  for (int c : qa.children(x)) {
    auto it = m.find(c);
    if (!a_.relevant(c) || it == m.end()) {
      sub.emplace(qa.id(c), Formula::constant(false));
    } else if (it->second == kAssumed) {
      sub.emplace(qa.id(c), Formula::constant(true));
    } else if (it->second < 0) {
      const int d = ~it->second;
      sub.emplace(qa.id(c), Formula::conj(Formula::var(qb.id(d)), b_.transitive(d)));
    } else {
      sub.emplace(qa.id(c), a_.trivial(c) ? Formula::var(qb.id(it->second))
                                           : Formula::conj(Formula::var(qb.id(it->second)), image_tr(c, m)));
    }
  }
  return substitute(qa.extended(x), sub);
}

bool Embedder::covered_by(int c, int d) {
  const Query& qa = a_.query();
  const Query& qb = b_.query();
  if (a_.polarity(c) != Polarity::Negative || qb.node(d).backbone() || !a_.relevant(c) || !b_.relevant(d)) return false;
  const EdgeType ec = qa.node(c).edge, ed = qb.node(d).edge;
  if (ec == EdgeType::AD && ed != EdgeType::AD) return false;
  if (!reverse_) reverse_ = std::make_unique<Embedder>(b_, a_, false);
  return !reverse_->positive(d, c).empty();
}

std::vector<NodeMap> Embedder::options_for_child(int c, int y) {
  const Query& qa = a_.query();
  const Query& qb = b_.query();
  std::vector<NodeMap> out;
  if (a_.polarity(c) == Polarity::Positive) {
    std::vector<int> targets;
    if (qa.node(c).edge == EdgeType::PC) {
      for (int d : qb.children(y))
        if (qb.node(d).edge == EdgeType::PC) targets.push_back(d);
    } else {
      // Nearer descendants first.
      targets = qb.subtree(y);
      targets.erase(targets.begin());
    }
    for (int d : targets)
      for (const auto& m : positive(c, d)) {
        out.push_back(m);
        if (out.size() >= kMaxAlternatives) break;
      }
    if (!qa.node(c).backbone()) out.push_back(NodeMap{});
  } else {
    for (int d : qb.children(y)) {
      if (qb.node(d).backbone()) continue;
      if (qb.node(d).edge == qa.node(c).edge)
        if (auto m = iso(c, d)) {
          out.push_back(*m);
          continue;
        }
      if (covered_by(c, d)) out.push_back(NodeMap{{c, ~d}});
    }
    // A child that never matches is false; a negated one may be assumed
    // present.
    if (!is_sat(a_.closure(c)))
      out.push_back(NodeMap{});
    else if (a_.polarity(c) == Polarity::Negative)
      out.push_back(NodeMap{{c, kAssumed}});
  }
  return out;
}

const std::vector<NodeMap>& Embedder::positive(int x, int y, bool top) {
  const auto key = std::make_tuple(x, y, top);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  auto& result = memo_[key];
  const Query& qa = a_.query();
  const Query& qb = b_.query();
  if (!a_.relevant(x) || !b_.relevant(y)) return result;
  if (!attr_implies(qb.node(y), qa.node(x))) return result;
  if (outputs_) {
    if (qa.node(x).output && !qb.node(y).output) return result;
    if (above_output(x) && !qb.node(y).backbone()) return result;
  }

  std::vector<int> kids;
  for (int c : qa.children(x))
    if (a_.relevant(c)) kids.push_back(c);
  std::vector<std::vector<NodeMap>> options;
  for (int c : kids) {
    options.push_back(options_for_child(c, y));
    if (options.back().empty()) return memo_[key];
  }

  Formula antecedent = b_.closure(top ? qb.root() : y);
  if (top && y != qb.root()) antecedent = Formula::conj(antecedent, Formula::var(qb.id(y)));
  const std::size_t n_outputs = qb.outputs().size();

  std::size_t budget = kCombinationBudget;
  std::vector<NodeMap> found;
  NodeMap cur{{x, y}};
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (found.size() >= kMaxAlternatives || budget == 0) return;
    if (i == options.size()) {
      --budget;
      if (outputs_) {
        std::set<int> images;
        std::size_t mapped = 0;
        for (const auto& [s, t] : cur)
          if (qa.node(s).output) {
            ++mapped;
            if (!images.insert(t).second) return;
          }
        if (top) {
          if (mapped != qa.outputs().size() || mapped != n_outputs) return;
        }
      }
      if (!a_.trivial(x) && !is_tautology(Formula::implies(antecedent, image_tr(x, cur)))) return;
      found.push_back(cur);
      return;
    }
    for (const auto& m : options[i]) {
      bool clash = false;
      if (outputs_) {
        for (const auto& [s, t] : m)
          if (qa.node(s).output)
            for (const auto& [s2, t2] : cur)
              if (qa.node(s2).output && t2 == t) clash = true;
      }
      if (clash) continue;
      for (const auto& kv : m) cur.insert(kv);
      rec(i + 1);
      for (const auto& kv : m) cur.erase(kv.first);
      if (found.size() >= kMaxAlternatives || budget == 0) return;
    }
  };
  rec(0);
  auto& slot = memo_[key];
  slot = std::move(found);
  return slot;
}

std::optional<NodeMap> Embedder::iso(int x, int y) {
  const auto key = std::make_pair(x, y);
  if (auto it = iso_memo_.find(key); it != iso_memo_.end()) return it->second;
  iso_memo_[key] = std::nullopt;
  const Query& qa = a_.query();
  const Query& qb = b_.query();
  if (!a_.relevant(x) || !b_.relevant(y) || qa.node(x).kind != qb.node(y).kind) return std::nullopt;
  if (!qa.node(x).attr.implies(qb.node(y).attr) || !qb.node(y).attr.implies(qa.node(x).attr)) return std::nullopt;
  std::vector<int> cx, cy;
  for (int c : qa.children(x))
    if (a_.relevant(c)) cx.push_back(c);
  for (int d : qb.children(y))
    if (b_.relevant(d)) cy.push_back(d);
  if (cx.size() != cy.size()) return std::nullopt;

  const Formula fx = live_extended(a_, x);
  const Formula fy = live_extended(b_, y);
  std::vector<char> used(cy.size(), 0);
  NodeMap cur{{x, y}};
  std::optional<NodeMap> result;
  std::function<bool(std::size_t)> rec = [&](std::size_t i) {
    if (i == cx.size()) {
      if (!equivalent_formulas(image(fx, cur), fy)) return false;
      result = cur;
      return true;
    }
    for (std::size_t j = 0; j < cy.size(); ++j) {
      if (used[j] || qa.node(cx[i]).edge != qb.node(cy[j]).edge) continue;
      auto sub = iso(cx[i], cy[j]);
      if (!sub) continue;
      used[j] = 1;
      for (const auto& kv : *sub) cur.insert(kv);
      if (rec(i + 1)) return true;
      for (const auto& kv : *sub) cur.erase(kv.first);
      used[j] = 0;
    }
    return false;
  };
  rec(0);
  iso_memo_[key] = result;
  return result;
}

}  // namespace detail

namespace {

// Checks that h restricted to subtree(x) is a structural equivalence.
bool iso_under(const QueryAnalysis& a, const QueryAnalysis& b, int x, const NodeMap& h) {
  const Query& qa = a.query();
  const Query& qb = b.query();
  auto it = h.find(x);
  if (it == h.end()) return false;
  const int y = it->second;
  if (!a.relevant(x) || !b.relevant(y) || qa.node(x).kind != qb.node(y).kind) return false;
  if (!qa.node(x).attr.implies(qb.node(y).attr) || !qb.node(y).attr.implies(qa.node(x).attr)) return false;
  std::set<int> want, got;
  for (int d : qb.children(y))
    if (b.relevant(d)) want.insert(d);
  for (int c : qa.children(x)) {
    if (!a.relevant(c)) continue;
    auto ci = h.find(c);
    if (ci == h.end() || ci->second < 0 || qb.parent(ci->second) != y || qb.node(ci->second).edge != qa.node(c).edge) return false;
    if (!got.insert(ci->second).second || !iso_under(a, b, c, h)) return false;
  }
  if (want != got) return false;
  detail::Embedder e(a, b, false);
  return detail::equivalent_formulas(e.image(detail::live_extended(a, x), h), detail::live_extended(b, y));
}

}  // namespace

std::optional<NodeMap> find_homomorphism(const QueryAnalysis& from, const QueryAnalysis& to) {
  const Query& qa = from.query();
  const Query& qb = to.query();
  const auto oa = qa.outputs();
  const auto ob = qb.outputs();
  if (!to.satisfiable()) {
    NodeMap m;
    for (std::size_t i = 0; i < std::min(oa.size(), ob.size()); ++i) m[oa[i]] = ob[i];
    return m;
  }
  if (oa.size() != ob.size()) return std::nullopt;
  detail::Embedder e(from, to, true);
  for (int r : qb.top_down()) {
    if (!qb.node(r).backbone() && !oa.empty()) continue;
    bool covers = true;
    for (int o : ob) covers = covers && (o == r || qb.is_ancestor(r, o));
    if (!covers) continue;
    for (const auto& m : e.positive(qa.root(), r, true))
      if (verify_homomorphism(from, to, m)) return m;
  }
  return std::nullopt;
}

bool verify_homomorphism(const QueryAnalysis& from, const QueryAnalysis& to, const NodeMap& h) {
  if (!to.satisfiable()) return true;
  const Query& qa = from.query();
  const Query& qb = to.query();
  const int ra = qa.root();
  auto root_it = h.find(ra);
  if (root_it == h.end()) return false;
  std::vector<char> above(qa.size(), 0);
  for (int o : qa.outputs())
    for (int p = o; p >= 0; p = qa.parent(p)) above[p] = 1;

  detail::Embedder e(from, to, true);
  for (const auto& [x, y] : h) {
    if (x < 0 || x >= qa.size() || y >= qb.size() || (y != kAssumed && ~y >= qb.size())) return false;
    if (y == kAssumed) {
      auto pit = h.find(qa.parent(x));
      if (x == ra || pit == h.end() || pit->second < 0 || from.polarity(x) != Polarity::Negative) return false;
      continue;
    }
    if (y < 0) {
      auto pit = h.find(qa.parent(x));
      if (x == ra || pit == h.end() || pit->second < 0 || qb.parent(~y) != pit->second || !e.covered_by(x, ~y))
        return false;
      continue;
    }
    if (!from.relevant(x) || !to.relevant(y)) return false;
    if (!attr_implies(qb.node(y), qa.node(x))) return false;
    if (above[x] && !qb.node(y).backbone()) return false;
    if (qa.node(x).output && !qb.node(y).output) return false;
    for (int c : qa.children(x))
      if (from.relevant(c) && qa.node(c).backbone() && !h.count(c)) return false;
    if (x == ra) continue;
    auto pit = h.find(qa.parent(x));
    if (pit == h.end()) return false;
    const int py = pit->second;
    if (from.polarity(x) == Polarity::Positive) {
      if (qa.node(x).edge == EdgeType::PC) {
        if (qb.parent(y) != py || qb.node(y).edge != EdgeType::PC) return false;
      } else if (!qb.is_ancestor(py, y)) {
        return false;
      }
    } else {
      if (qb.parent(y) != py || qb.node(y).edge != qa.node(x).edge || !iso_under(from, to, x, h)) return false;
    }
  }
  for (int x = 0; x < qa.size(); ++x) {
    auto it = h.find(x);
    if (it == h.end() || it->second < 0) continue;
    for (int c : qa.children(x))
      if (from.relevant(c) && from.polarity(c) != Polarity::Positive && !h.count(c) && is_sat(from.closure(c)))
        return false;
  }

  std::set<int> images;
  for (int o : qa.outputs()) {
    auto it = h.find(o);
    if (it == h.end() || !images.insert(it->second).second) return false;
  }
  if (images.size() != qb.outputs().size()) return false;

  Formula goal = e.image_tr(ra, h);
  if (root_it->second != qb.root()) goal = Formula::conj(Formula::var(qb.id(root_it->second)), goal);
  return is_tautology(Formula::implies(to.closure(qb.root()), goal));
}

bool contains(const Query& q1, const Query& q2) {
  QueryAnalysis a1(q1), a2(q2);
  return find_homomorphism(a2, a1).has_value();
}

bool equivalent(const Query& q1, const Query& q2) {
  QueryAnalysis a1(q1), a2(q2);
  return find_homomorphism(a2, a1).has_value() && find_homomorphism(a1, a2).has_value();
}

namespace {

std::string encode(const Query& q, int u) {
  const auto& kids = q.children(u);
  std::vector<std::pair<std::string, int>> enc;
  for (int c : kids) enc.emplace_back(encode(q, c), c);
  std::sort(enc.begin(), enc.end());

  // Children with equal encodings are interchangeable; pick the renaming
  // that yields the smallest structural text.
  std::vector<std::vector<int>> groups;
  for (std::size_t i = 0; i < enc.size(); ++i) {
    if (i == 0 || enc[i].first != enc[i - 1].first) groups.emplace_back();
    groups.back().push_back(enc[i].second);
  }
  std::size_t perms = 1;
  for (auto& g : groups) {
    std::sort(g.begin(), g.end());
    for (std::size_t k = 2; k <= g.size(); ++k) perms *= k;
  }
  std::string best;
  bool have = false;
  std::function<void(std::size_t)> rec = [&](std::size_t gi) {
    if (gi == groups.size()) {
      std::map<std::string, std::string> names;
      std::size_t pos = 0;
      for (const auto& g : groups)
        for (int c : g) names[q.id(c)] = "c" + std::to_string(pos++);
      std::string s = rename(q.node(u).structural, names).str();
      if (!have || s < best) best = s, have = true;
      return;
    }
    if (perms > 720) {
      rec(gi + 1);
      return;
    }
    auto& g = groups[gi];
    std::sort(g.begin(), g.end());
    do rec(gi + 1);
    while (std::next_permutation(g.begin(), g.end()));
  };
  rec(0);

  std::string out = std::string(q.node(u).backbone() ? "B" : "P") + (q.node(u).output ? "o" : "-") +
                    (q.parent(u) < 0 ? "R" : q.node(u).edge == EdgeType::PC ? "/" : "//") + "[" + q.node(u).attr.str() +
                    "]{" + best + "}(";
  for (const auto& [s, c] : enc) out += s + ",";
  return out + ")";
}

}  // namespace

bool isomorphic(const Query& q1, const Query& q2) {
  return q1.size() == q2.size() && encode(q1, q1.root()) == encode(q2, q2.root());
}

namespace {

// Drops `removed` (closed under descendants), substituting 0 for their
// variables unless `fixed` already rewrote the parent's predicate.
Query rebuild(const Query& q, const std::vector<char>& removed, const std::map<int, Formula>& fixed = {}) {
  std::vector<int> index(q.size(), -1);
  std::vector<QueryNode> nodes;
  for (int u = 0; u < q.size(); ++u) {
    if (removed[u]) continue;
    index[u] = static_cast<int>(nodes.size());
    nodes.push_back(q.node(u));
  }
  for (int u = 0; u < q.size(); ++u) {
    if (removed[u]) continue;
    QueryNode& n = nodes[index[u]];
    n.parent = q.parent(u) < 0 ? -1 : index[q.parent(u)];
    if (auto it = fixed.find(u); it != fixed.end()) n.structural = it->second;
    std::map<std::string, Formula> sub;
    for (int c : q.children(u))
      if (removed[c]) sub.emplace(q.id(c), Formula::constant(false));
    if (!sub.empty()) n.structural = substitute(n.structural, sub);
  }
  return Query(std::move(nodes));
}

void mark_subtree(const Query& q, int u, std::vector<char>& removed) {
  for (int d : q.subtree(u)) removed[d] = 1;
}

Query unsatisfiable_form(const Query& q) {
  std::vector<char> removed(q.size(), 1);
  for (int o : q.outputs())
    for (int p = o; p >= 0; p = q.parent(p)) removed[p] = 0;
  removed[q.root()] = 0;
  std::vector<int> index(q.size(), -1);
  std::vector<QueryNode> nodes;
  for (int u = 0; u < q.size(); ++u) {
    if (removed[u]) continue;
    index[u] = static_cast<int>(nodes.size());
    QueryNode n = q.node(u);
    n.structural = Formula::constant(u != q.root());
    nodes.push_back(std::move(n));
  }
  for (int u = 0; u < q.size(); ++u)
    if (!removed[u]) nodes[index[u]].parent = q.parent(u) < 0 ? -1 : index[q.parent(u)];
  return Query(std::move(nodes));
}

// Algorithm steps that only drop nodes which can never contribute.
std::optional<Query> drop_dead(const Query& q) {
  QueryAnalysis qa(q);
  std::vector<char> removed(q.size(), 0);
  bool any = false;
  for (int u : q.top_down()) {
    if (u == q.root() || removed[u] || q.node(u).backbone()) continue;
    if (!qa.attr_satisfiable(u) || !qa.independent(u)) {
      mark_subtree(q, u, removed);
      any = true;
    }
  }
  if (!any) {
    for (int u : q.bottom_up()) {
      if (u == q.root() || q.node(u).backbone()) continue;
      if (!is_sat(qa.closure(u))) {
        mark_subtree(q, u, removed);
        any = true;
        break;
      }
    }
  }
  if (!any) {
    bool changed = false;
    std::vector<QueryNode> nodes = q.nodes();
    for (auto& n : nodes) {
      Formula s = simplify_min_vars(n.structural);
      if (!(s == n.structural)) {
        n.structural = s;
        changed = true;
      }
    }
    if (!changed) return std::nullopt;
    return Query(std::move(nodes));
  }
  return rebuild(q, removed);
}

bool has_output_below(const Query& q, int u) {
  for (int d : q.subtree(u))
    if (q.node(d).output) return true;
  return false;
}

// Candidates from the forced-true and forced-false branches.
std::vector<Query> forced_candidates(const Query& q) {
  QueryAnalysis qa(q);
  std::vector<Query> out;
  const auto pairs = qa.subsumption_pairs();
  for (int u : q.top_down()) {
    if (u == q.root() || !qa.relevant(u)) continue;
    if (qa.forced_true(u)) {
      for (const auto& [s, t] : pairs) {
        if (t != u || has_output_below(q, s)) continue;
        std::vector<char> removed(q.size(), 0);
        mark_subtree(q, s, removed);
        std::map<int, Formula> fixed;
        const int p = q.parent(s);
        fixed[p] = substitute(q.node(p).structural, q.id(s), Formula::constant(true));
        out.push_back(rebuild(q, removed, fixed));
      }
    }
    if (qa.forced_false(u)) {
      for (const auto& [s, t] : pairs) {
        if (s != u || has_output_below(q, t) || q.node(t).backbone()) continue;
        std::vector<char> removed(q.size(), 0);
        mark_subtree(q, t, removed);
        out.push_back(rebuild(q, removed));
      }
    }
  }
  return out;
}

}  // namespace

Query minimize(const Query& input) {
  if (!QueryAnalysis(input).satisfiable()) return unsatisfiable_form(input);
  Query q = input;
  for (bool changed = true; changed;) {
    changed = false;
    if (auto next = drop_dead(q)) {
      if (equivalent(q, *next)) {
        q = std::move(*next);
        changed = true;
        continue;
      }
    }
    for (auto& cand : forced_candidates(q))
      if (equivalent(q, cand)) {
        q = std::move(cand);
        changed = true;
        break;
      }
  }
  return q;
}

}  // namespace gtea

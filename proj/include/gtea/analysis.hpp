#pragma once

#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "gtea/data_graph.hpp"
#include "gtea/query.hpp"

namespace gtea {

enum class Polarity { Positive, Negative, Mixed };

// Node correspondence from one query into another (or into itself).
// A negated predicate c may map to ~d (a negative value): every match of c
// then matches d, so d's absence implies c's. It may also map to kAssumed,
// standing for a match that may or may not exist.
using NodeMap = std::map<int, int>;
constexpr int kAssumed = std::numeric_limits<int>::min();

// Cached static analyses of one query. Not thread-safe while caches fill.
class QueryAnalysis {
 public:
  explicit QueryAnalysis(Query q);

  const Query& query() const { return q_; }

  bool independent(int u) const { return ind_[u] != 0; }
  std::vector<int> independent_nodes() const;
  bool attr_satisfiable(int u) const { return attr_sat_[u] != 0; }
  // Independently constraint with a satisfiable attribute predicate.
  bool relevant(int u) const { return independent(u) && attr_satisfiable(u); }
  // Sign of u's variable within its parent's structural predicate.
  Polarity polarity(int u) const { return pol_[u]; }

  const Formula& transitive(int u) const { return ftr_[u]; }
  // Clauses for subsumption pairs whose common parent is u, conjoined with
  // f_tr(u) after zeroing descendants with unsatisfiable attributes.
  Formula complete(int u) const;
  // As complete(u), plus the clauses of every node below u.
  Formula closure(int u) const;

  // u1 ◁ u2: every match of u2 is a match of u1. Returns the descendant
  // correspondence used for the renaming.
  std::optional<NodeMap> similar(int u1, int u2) const;
  // u1 ⊴ u2.
  bool subsumed(int u1, int u2) const;
  std::vector<std::pair<int, int>> subsumption_pairs() const;

  bool satisfiable() const;
  DataGraph witness_graph() const;

  // closure(root) -> p_u (resp. !p_u) is a tautology.
  bool forced_true(int u) const;
  bool forced_false(int u) const;
  // f_tr(u) follows from the pair clauses below u, so u matches every node
  // its attributes accept.
  bool trivial(int u) const;

 private:
  Formula zero_dead(const Formula& f, int u) const;
  const std::vector<std::pair<int, int>>& pairs_at(int lca) const;
  Formula pair_clauses(int lca) const;

  Query q_;
  std::vector<char> ind_, attr_sat_;
  std::vector<Polarity> pol_;
  std::vector<Formula> ftr_;
  mutable std::vector<std::optional<std::vector<std::pair<int, int>>>> pairs_;
  mutable std::vector<std::optional<Formula>> closure_;
  mutable std::map<int, char> forced_t_, forced_f_, trivial_;
};

bool attr_implies(const QueryNode& u2, const QueryNode& u1);

// Homomorphism from `from` into `to` (nodes of `from` mapped to nodes of
// `to`, absent keys meaning ⊥). Existence implies to ⊑ from.
std::optional<NodeMap> find_homomorphism(const QueryAnalysis& from, const QueryAnalysis& to);
// Checks the conditions a homomorphism must meet.
bool verify_homomorphism(const QueryAnalysis& from, const QueryAnalysis& to, const NodeMap& h);

// q1 ⊑ q2.
bool contains(const Query& q1, const Query& q2);
bool equivalent(const Query& q1, const Query& q2);
bool isomorphic(const Query& q1, const Query& q2);
Query minimize(const Query& q);

}  // namespace gtea

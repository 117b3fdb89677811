#pragma once

#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "gtea/analysis.hpp"

namespace gtea::detail {

// Maps nodes of query `a` onto nodes of query `b` so that a match of an
// image implies a match of the original. With `outputs` set, output nodes
// must land on output nodes and nodes above outputs on backbone nodes.
class Embedder {
 public:
  Embedder(const QueryAnalysis& a, const QueryAnalysis& b, bool outputs);

  // Alternatives for the subtree of x placed at y. The per-level implication
  // closure(y) -> f_tr(x)[map] is checked unless `top` is set.
  const std::vector<NodeMap>& positive(int x, int y, bool top = false);
  // Exact structural equivalence of subtree(x) and subtree(y).
  std::optional<NodeMap> iso(int x, int y);

  // f rewritten over `b`'s variables, unmapped ones set to 0.
  Formula image(const Formula& f, const NodeMap& m) const;
  // f_tr(x) of `a` over `b`'s variables. A reversed child c -> ~d
  // contributes d's own transitive formula.
  Formula image_tr(int x, const NodeMap& m) const;
  // Every match of c (in `a`) matches d (in `b`).
  bool covered_by(int c, int d);

  static constexpr std::size_t kMaxAlternatives = 32;
  static constexpr std::size_t kCombinationBudget = 4096;

 private:
  std::vector<NodeMap> options_for_child(int c, int y);
  bool above_output(int x) const { return above_[x] != 0; }

  const QueryAnalysis& a_;
  const QueryAnalysis& b_;
  bool outputs_;
  std::vector<char> above_;
  std::map<std::tuple<int, int, bool>, std::vector<NodeMap>> memo_;
  std::map<std::pair<int, int>, std::optional<NodeMap>> iso_memo_;
  std::unique_ptr<Embedder> reverse_;
};

bool equivalent_formulas(const Formula& x, const Formula& y);
// f_ext(u) with irrelevant children set to 0.
Formula live_extended(const QueryAnalysis& qa, int u);

}  // namespace gtea::detail

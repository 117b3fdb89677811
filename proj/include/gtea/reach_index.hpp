#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gtea/data_graph.hpp"
#include "json.hpp"

namespace gtea {

// Index vertices are components of the condensed graph.
using Vertex = std::uint32_t;
constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();

struct ChainPos {
  std::uint32_t cid;
  std::uint32_t sid;
  bool operator==(const ChainPos& o) const { return cid == o.cid && sid == o.sid; }
  bool operator<(const ChainPos& o) const { return cid != o.cid ? cid < o.cid : sid < o.sid; }
};

// One entry per chain. `open` records whether the bound may be met with
// equality by the node sitting at that position itself: it is set when the
// bound comes from an entry or exit list, or from a cyclic member.
struct ContourEntry {
  std::uint32_t cid;
  std::uint32_t sid;
  bool open;
};

class Contour {
 public:
  const ContourEntry* find(std::uint32_t cid) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<ContourEntry>& entries() const { return entries_; }

 private:
  friend class ReachIndex;
  std::vector<ContourEntry> entries_;
};

// Per-vertex counts of list lookups, used to check that no list is read twice.
struct ReadCounter {
  std::vector<std::uint32_t> lout, lin;
  std::uint64_t lout_total = 0, lin_total = 0;

  void reset(std::size_t vertices);
  std::uint32_t max_lout() const;
  std::uint32_t max_lin() const;
};

class ReachIndex {
 public:
  static ReachIndex build(const DataGraph& g);
  static ReachIndex build(const DataGraph& g, const std::vector<std::vector<std::string>>& chains);
  static ReachIndex from_json(const DataGraph& g, const nlohmann::json& j);
  static ReachIndex load(const DataGraph& g, const std::string& path);
  nlohmann::json to_json() const;

  std::size_t vertex_count() const { return pos_.size(); }
  std::size_t chain_count() const { return chains_.size(); }
  std::size_t lout_lists() const { return lout_nonempty_; }
  std::size_t lin_lists() const { return lin_nonempty_; }
  std::size_t lout_entries() const;
  std::size_t lin_entries() const;

  Vertex vertex_of(NodeId v) const { return comp_[v]; }
  NodeId representative(Vertex x) const { return rep_[x]; }
  bool cyclic(Vertex x) const { return cyclic_[x] != 0; }
  ChainPos pos(Vertex x) const { return pos_[x]; }
  const std::vector<Vertex>& chain(std::uint32_t cid) const { return chains_[cid]; }
  Vertex at(ChainPos p) const { return chains_[p.cid][p.sid]; }

  std::span<const ChainPos> lout(Vertex x, ReadCounter* rc = nullptr) const;
  std::span<const ChainPos> lin(Vertex x, ReadCounter* rc = nullptr) const;
  // Nearest vertex after (resp. before) x on its chain with a nonempty exit
  // (resp. entry) list.
  Vertex next(Vertex x) const { return next_[x]; }
  Vertex prev(Vertex x) const { return prev_[x]; }

  // Per-chain minimum positions reachable from x, including x itself.
  std::vector<ChainPos> x_list(Vertex x) const;
  // Per-chain maximum positions reaching x, including x itself.
  std::vector<ChainPos> y_list(Vertex x) const;

  bool reaches(NodeId a, NodeId b) const;
  bool vertex_reaches(Vertex a, Vertex b) const;

  Contour pred_contour(std::span<const NodeId> nodes, ReadCounter* rc = nullptr) const;
  Contour succ_contour(std::span<const NodeId> nodes, ReadCounter* rc = nullptr) const;
  // Does some node of the contour's set lie strictly below (resp. above) v?
  bool reaches_set(NodeId v, const Contour& pred) const;
  bool set_reaches(const Contour& succ, NodeId v) const;

  // Bound tests against a single position; `own` marks the tested vertex's
  // own chain position, where equality needs an open entry.
  static bool below(const Contour& pred, ChainPos x, bool own);
  static bool above(const Contour& succ, ChainPos y, bool own);

 private:
  void assign_cover(const DataGraph& g, const Condensation& c, std::vector<std::vector<Vertex>> chains);
  void compute_lists(const Condensation& c);
  void link();

  std::vector<Vertex> comp_;
  std::vector<NodeId> rep_;
  std::vector<std::string> rep_ids_;
  std::vector<std::vector<std::string>> cyclic_members_;
  std::vector<char> cyclic_;
  std::vector<std::vector<Vertex>> chains_;
  std::vector<ChainPos> pos_;
  std::vector<std::vector<ChainPos>> lout_, lin_;
  std::vector<Vertex> next_, prev_;
  std::size_t lout_nonempty_ = 0, lin_nonempty_ = 0;
};

}  // namespace gtea

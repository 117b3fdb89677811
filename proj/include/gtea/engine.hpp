#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "gtea/data_graph.hpp"
#include "gtea/query.hpp"
#include "gtea/reach_index.hpp"
#include "gtea/result.hpp"
#include "json.hpp"

namespace gtea {

// Candidates per query node, sorted by node id.
using CandidateMap = std::vector<std::vector<NodeId>>;

struct EngineStats {
  std::vector<std::size_t> initial, after_downward, after_upward;
  // Exit list reads during downward pruning: total, and the largest number
  // of reads of a single list while handling one query node.
  std::uint64_t lout_reads = 0;
  std::uint32_t max_lout_per_node = 0;
  // Entry list reads during upward pruning, per parent.
  std::uint64_t lin_reads = 0;
  std::uint32_t max_lin_per_parent = 0;
  std::size_t graph_nodes = 0, graph_edges = 0;
  std::size_t pc_edges_removed = 0;
  std::size_t raw_tuples = 0;

  nlohmann::json to_json(const Query& q) const;
};

struct EvalOptions {
  bool dedupe = true;
  // Query node ids whose subtree matches are nested instead of multiplied.
  std::set<std::string> group;
  // Compute matching-graph edges by pairwise reachability tests.
  bool pairwise_edges = false;
};

CandidateMap initial_candidates(const DataGraph& g, const Query& q);
CandidateMap prune_downward(const ReachIndex& idx, const DataGraph& g, const Query& q, CandidateMap cands,
                            EngineStats* stats = nullptr);

// Backbone nodes on the paths from the root to outputs whose candidate sets
// have more than one member, in top-down order.
std::vector<int> prime_subtree(const Query& q, const CandidateMap& cands);
// Backbone nodes on the paths from the root to every output.
std::vector<int> output_paths(const Query& q);

// Removes candidates of `tree` nodes that no candidate of the parent reaches.
CandidateMap prune_upward(const ReachIndex& idx, const DataGraph& g, const Query& q, const std::vector<int>& tree,
                          CandidateMap cands, EngineStats* stats = nullptr);

struct ShrunkPlan {
  // Each component lists its nodes top-down; the first is its root.
  std::vector<std::vector<int>> components;
  std::vector<std::pair<int, NodeId>> fixed;
  bool empty = false;
};

ShrunkPlan shrink_prime(const Query& q, const std::vector<int>& tree, const CandidateMap& cands);

struct MatchingGraph {
  // For plan node u: kids[u] are its plan children, and
  // branch[u][i][k] indexes cands[kids[u][k]] reached from cands[u][i].
  std::vector<std::vector<int>> kids;
  std::vector<std::vector<std::vector<std::vector<std::uint32_t>>>> branch;
  std::vector<std::vector<char>> alive;

  std::size_t node_count() const;
  std::size_t edge_count() const;
};

MatchingGraph build_matching_graph(const ReachIndex& idx, const DataGraph& g, const Query& q, const ShrunkPlan& plan,
                                   const CandidateMap& cands, bool pairwise = false);
// Drops PC branch entries whose endpoints are not adjacent, then nodes left
// without a branch, top-down. Returns the number of dropped entries.
std::size_t enforce_pc_edges(const DataGraph& g, const Query& q, const ShrunkPlan& plan, const CandidateMap& cands,
                             MatchingGraph& mg);

struct GroupedResults {
  struct Row {
    std::vector<NodeId> values;  // per column, kUnboundNode inside groups
    std::vector<std::uint32_t> groups;
  };
  std::vector<int> columns;
  std::vector<Row> rows;
  // Nested rows of each group element, with the group node's binding.
  std::vector<std::vector<Row>> groups;

  ResultSet flatten() const;
};

constexpr NodeId kUnboundNode = static_cast<NodeId>(-1);

GroupedResults collect_results(const Query& q, const ShrunkPlan& plan, const CandidateMap& cands,
                               const MatchingGraph& mg, const EvalOptions& options, EngineStats* stats = nullptr);

ResultSet evaluate(const DataGraph& g, const ReachIndex& idx, const Query& q, const EvalOptions& options = {},
                   EngineStats* stats = nullptr);
GroupedResults evaluate_grouped(const DataGraph& g, const ReachIndex& idx, const Query& q,
                                const EvalOptions& options, EngineStats* stats = nullptr);

}  // namespace gtea

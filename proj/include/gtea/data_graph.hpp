#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gtea/attributes.hpp"
#include "json.hpp"

namespace gtea {

using NodeId = std::uint32_t;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataGraph {
 public:
  NodeId add_node(const std::string& id, const Attributes& attrs = {});
  void add_edge(NodeId src, NodeId dst);
  // Sorts and deduplicates adjacency lists.
  void finalize();

  std::size_t size() const { return ids_.size(); }
  std::size_t edge_count() const { return edges_; }
  const std::string& id(NodeId v) const { return ids_[v]; }
  std::optional<NodeId> find(const std::string& id) const;
  NodeId at(const std::string& id) const;

  const Value* attr(NodeId v, const std::string& name) const;
  Attributes attributes(NodeId v) const;
  bool matches(NodeId v, const AttributePredicate& p) const;

  std::span<const NodeId> out(NodeId v) const { return out_[v]; }
  std::span<const NodeId> in(NodeId v) const { return in_[v]; }
  bool has_edge(NodeId src, NodeId dst) const;

 private:
  int name_index(const std::string& name) const;

  std::vector<std::string> ids_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> name_ids_;
  std::vector<std::vector<std::pair<int, Value>>> attrs_;
  std::vector<std::vector<NodeId>> out_, in_;
  std::size_t edges_ = 0;
};

DataGraph graph_from_json(const nlohmann::json& j);
DataGraph load_graph(const std::string& path);
nlohmann::json graph_to_json(const DataGraph& g);

std::vector<NodeId> candidate_set(const DataGraph& g, const AttributePredicate& p);

// Strongly connected components numbered in topological order of the
// condensed DAG, so every component edge goes from a lower to a higher index.
struct Condensation {
  std::vector<std::uint32_t> comp;
  std::vector<std::vector<NodeId>> members;
  std::vector<char> cyclic;
  std::vector<std::vector<std::uint32_t>> out, in;

  std::size_t size() const { return members.size(); }
  bool acyclic() const;
};

Condensation condense(const DataGraph& g);

}  // namespace gtea

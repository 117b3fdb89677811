#pragma once

#include <string>
#include <vector>

#include "gtea/attributes.hpp"
#include "gtea/formula.hpp"
#include "json.hpp"

namespace gtea {

enum class NodeKind { Backbone, Predicate };
enum class EdgeType { PC, AD };
enum class QueryClass { Conjunctive, UnionConjunctive, General };

struct QueryNode {
  std::string id;
  NodeKind kind = NodeKind::Backbone;
  bool output = false;
  int parent = -1;
  EdgeType edge = EdgeType::AD;
  AttributePredicate attr;
  Formula structural = Formula::constant(true);
  std::vector<int> children;

  bool backbone() const { return kind == NodeKind::Backbone; }
};

class QueryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A validated tree pattern. Node 0 is not necessarily the root; use root().
class Query {
 public:
  Query() = default;
  // Children lists are recomputed from parent links; throws QueryError.
  explicit Query(std::vector<QueryNode> nodes);

  static Query from_json(const nlohmann::json& j);
  static Query load(const std::string& path);
  nlohmann::json to_json() const;

  int size() const { return static_cast<int>(nodes_.size()); }
  int root() const { return root_; }
  const QueryNode& node(int u) const { return nodes_[u]; }
  const std::vector<QueryNode>& nodes() const { return nodes_; }
  const std::string& id(int u) const { return nodes_[u].id; }
  int index_of(const std::string& id) const;
  const std::vector<int>& children(int u) const { return nodes_[u].children; }
  int parent(int u) const { return nodes_[u].parent; }

  // Parents before children.
  const std::vector<int>& top_down() const { return order_; }
  std::vector<int> bottom_up() const { return {order_.rbegin(), order_.rend()}; }
  std::vector<int> outputs() const;
  // Proper ancestor test.
  bool is_ancestor(int a, int d) const;
  int depth(int u) const { return depth_[u]; }
  int lca(int a, int b) const;
  std::vector<int> subtree(int u) const;

  Formula extended(int u) const;
  QueryClass classify() const;

 private:
  std::vector<QueryNode> nodes_;
  std::vector<int> order_, depth_;
  int root_ = -1;
};

const char* kind_text(NodeKind k);
const char* edge_text(EdgeType e);

}  // namespace gtea

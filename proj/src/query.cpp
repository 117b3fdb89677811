#include "gtea/query.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace gtea {

const char* kind_text(NodeKind k) { return k == NodeKind::Backbone ? "backbone" : "predicate"; }
const char* edge_text(EdgeType e) { return e == EdgeType::PC ? "PC" : "AD"; }

Query::Query(std::vector<QueryNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw QueryError("query has no nodes");
  std::map<std::string, int> ids;
  for (int u = 0; u < size(); ++u) {
    if (nodes_[u].id.empty()) throw QueryError("query node with empty id");
    if (!ids.emplace(nodes_[u].id, u).second) throw QueryError("duplicate query node id '" + nodes_[u].id + "'");
    nodes_[u].children.clear();
  }
  for (int u = 0; u < size(); ++u) {
    const int p = nodes_[u].parent;
    if (p < 0) {
      if (root_ >= 0) throw QueryError("query has more than one root");
      root_ = u;
      continue;
    }
    if (p >= size() || p == u) throw QueryError("bad parent for '" + nodes_[u].id + "'");
    nodes_[p].children.push_back(u);
  }
  if (root_ < 0) throw QueryError("query has no root");

  depth_.assign(size(), -1);
  order_ = {root_};
  depth_[root_] = 0;
  for (std::size_t i = 0; i < order_.size(); ++i)
    for (int c : nodes_[order_[i]].children) {
      depth_[c] = depth_[order_[i]] + 1;
      order_.push_back(c);
    }
  if (static_cast<int>(order_.size()) != size()) throw QueryError("query edges do not form a tree");

  if (!nodes_[root_].backbone()) throw QueryError("the root must be a backbone node");
  for (int u = 0; u < size(); ++u) {
    const QueryNode& n = nodes_[u];
    if (n.output && !n.backbone()) throw QueryError("predicate node '" + n.id + "' cannot be an output");
    if (n.backbone() && n.parent >= 0 && !nodes_[n.parent].backbone())
      throw QueryError("backbone node '" + n.id + "' has a predicate parent");
    for (const auto& v : n.structural.variables()) {
      auto it = ids.find(v);
      if (it == ids.end() || nodes_[it->second].parent != u)
        throw QueryError("structural predicate of '" + n.id + "' references '" + v + "', which is not a child");
      if (nodes_[it->second].backbone())
        throw QueryError("structural predicate of '" + n.id + "' references backbone child '" + v + "'");
    }
  }
}

int Query::index_of(const std::string& id) const {
  for (int u = 0; u < size(); ++u)
    if (nodes_[u].id == id) return u;
  return -1;
}

std::vector<int> Query::outputs() const {
  std::vector<int> out;
  for (int u : order_)
    if (nodes_[u].output) out.push_back(u);
  return out;
}

bool Query::is_ancestor(int a, int d) const {
  for (int p = nodes_[d].parent; p >= 0; p = nodes_[p].parent)
    if (p == a) return true;
  return false;
}

int Query::lca(int a, int b) const {
  while (depth_[a] > depth_[b]) a = nodes_[a].parent;
  while (depth_[b] > depth_[a]) b = nodes_[b].parent;
  while (a != b) {
    a = nodes_[a].parent;
    b = nodes_[b].parent;
  }
  return a;
}

std::vector<int> Query::subtree(int u) const {
  std::vector<int> out{u};
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int c : nodes_[out[i]].children) out.push_back(c);
  return out;
}

Formula Query::extended(int u) const {
  std::vector<Formula> ops{nodes_[u].structural};
  for (int c : nodes_[u].children)
    if (nodes_[c].backbone()) ops.push_back(Formula::var(nodes_[c].id));
  return Formula::conj(std::move(ops));
}

static bool has_kind(const Formula& f, Formula::Kind k) {
  if (f.kind() == k) return true;
  for (const auto& g : f.operands())
    if (has_kind(g, k)) return true;
  return false;
}

QueryClass Query::classify() const {
  bool neg = false, disj = false;
  for (const auto& n : nodes_) {
    neg = neg || has_kind(n.structural, Formula::Kind::Not) || n.structural.is_false();
    disj = disj || has_kind(n.structural, Formula::Kind::Or);
  }
  if (neg) return QueryClass::General;
  return disj ? QueryClass::UnionConjunctive : QueryClass::Conjunctive;
}

Query Query::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array())
    throw QueryError("query JSON needs a \"nodes\" array");
  std::vector<QueryNode> nodes;
  std::map<std::string, int> ids;
  std::vector<std::string> parents;
  try {
    for (const auto& n : j["nodes"]) {
      if (!n.is_object() || !n.contains("id") || !n["id"].is_string()) throw QueryError("query node without string \"id\"");
      QueryNode q;
      q.id = n["id"].get<std::string>();
      const std::string kind = n.value("kind", "backbone");
      if (kind == "backbone") {
        q.kind = NodeKind::Backbone;
      } else if (kind == "predicate") {
        q.kind = NodeKind::Predicate;
      } else {
        throw QueryError("unknown node kind '" + kind + "'");
      }
      q.output = n.value("output", false);
      const std::string edge = n.value("edge", "AD");
      if (edge == "PC") {
        q.edge = EdgeType::PC;
      } else if (edge == "AD") {
        q.edge = EdgeType::AD;
      } else {
        throw QueryError("unknown edge type '" + edge + "'");
      }
      q.attr = AttributePredicate::parse(n.value("attr", ""));
      q.structural = parse_formula(n.value("structural", "1"));
      parents.push_back(n.contains("parent") && !n["parent"].is_null() ? n["parent"].get<std::string>() : "");
      ids.emplace(q.id, static_cast<int>(nodes.size()));
      nodes.push_back(std::move(q));
    }
  } catch (const nlohmann::json::exception& e) {
    throw QueryError(std::string("malformed query node: ") + e.what());
  } catch (const FormulaSyntaxError& e) {
    throw QueryError(std::string("structural predicate: ") + e.what());
  } catch (const AttributeSyntaxError& e) {
    throw QueryError(std::string("attribute predicate: ") + e.what());
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (parents[i].empty()) continue;
    auto it = ids.find(parents[i]);
    if (it == ids.end()) throw QueryError("unknown parent '" + parents[i] + "' of '" + nodes[i].id + "'");
    nodes[i].parent = it->second;
  }
  return Query(std::move(nodes));
}

Query Query::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw QueryError("cannot open query file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw QueryError("malformed query JSON in '" + path + "': " + e.what());
  }
  return from_json(j);
}

nlohmann::json Query::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    nlohmann::json o = {{"id", n.id},
                        {"kind", kind_text(n.kind)},
                        {"output", n.output},
                        {"attr", n.attr.str()},
                        {"structural", n.structural.str()}};
    if (n.parent < 0) {
      o["parent"] = nullptr;
    } else {
      o["parent"] = nodes_[n.parent].id;
      o["edge"] = edge_text(n.edge);
    }
    nodes.push_back(o);
  }
  return {{"nodes", nodes}};
}

}  // namespace gtea

#include "gtea/data_graph.hpp"

#include <algorithm>
#include <fstream>

namespace gtea {

NodeId DataGraph::add_node(const std::string& id, const Attributes& attrs) {
  if (index_.count(id)) throw InputError("duplicate node id '" + id + "'");
  const NodeId v = static_cast<NodeId>(ids_.size());
  ids_.push_back(id);
  index_.emplace(id, v);
  std::vector<std::pair<int, Value>> row;
  for (const auto& [k, val] : attrs) {
    auto it = name_ids_.find(k);
    int n;
    if (it == name_ids_.end()) {
      n = static_cast<int>(names_.size());
      names_.push_back(k);
      name_ids_.emplace(k, n);
    } else {
      n = it->second;
    }
    row.emplace_back(n, val);
  }
  std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  attrs_.push_back(std::move(row));
  out_.emplace_back();
  in_.emplace_back();
  return v;
}

void DataGraph::add_edge(NodeId src, NodeId dst) {
  if (src >= size() || dst >= size()) throw InputError("edge endpoint out of range");
  out_[src].push_back(dst);
  in_[dst].push_back(src);
  ++edges_;
}

void DataGraph::finalize() {
  edges_ = 0;
  for (auto* lists : {&out_, &in_}) {
    for (auto& l : *lists) {
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
    }
  }
  for (const auto& l : out_) edges_ += l.size();
}

std::optional<NodeId> DataGraph::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId DataGraph::at(const std::string& id) const {
  auto v = find(id);
  if (!v) throw InputError("unknown node '" + id + "'");
  return *v;
}

int DataGraph::name_index(const std::string& name) const {
  auto it = name_ids_.find(name);
  return it == name_ids_.end() ? -1 : it->second;
}

const Value* DataGraph::attr(NodeId v, const std::string& name) const {
  const int n = name_index(name);
  if (n < 0) return nullptr;
  for (const auto& [k, val] : attrs_[v])
    if (k == n) return &val;
  return nullptr;
}

Attributes DataGraph::attributes(NodeId v) const {
  Attributes out;
  for (const auto& [k, val] : attrs_[v]) out.emplace(names_[k], val);
  return out;
}

bool DataGraph::matches(NodeId v, const AttributePredicate& p) const {
  return p.satisfied_by([&](const std::string& k) { return attr(v, k); });
}

bool DataGraph::has_edge(NodeId src, NodeId dst) const {
  const auto& l = out_[src];
  return std::binary_search(l.begin(), l.end(), dst);
}

static Value value_from_json(const nlohmann::json& j, const std::string& where) {
  if (j.is_number_integer()) return Value(j.get<std::int64_t>());
  if (j.is_number_float()) return Value(j.get<double>());
  if (j.is_string()) return Value(j.get<std::string>());
  if (j.is_boolean()) return Value(std::int64_t{j.get<bool>() ? 1 : 0});
  throw InputError("unsupported attribute value at " + where);
}

static std::string id_from_json(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<std::int64_t>());
  throw InputError("node ids must be strings or integers");
}

DataGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array())
    throw InputError("graph JSON needs a \"nodes\" array");
  DataGraph g;
  for (const auto& n : j["nodes"]) {
    if (!n.is_object() || !n.contains("id")) throw InputError("graph node without \"id\"");
    const std::string id = id_from_json(n["id"]);
    Attributes attrs;
    if (n.contains("attrs")) {
      if (!n["attrs"].is_object()) throw InputError("\"attrs\" of node '" + id + "' must be an object");
      for (const auto& [k, v] : n["attrs"].items()) attrs.emplace(k, value_from_json(v, id + "." + k));
    }
    g.add_node(id, attrs);
  }
  if (j.contains("edges")) {
    if (!j["edges"].is_array()) throw InputError("\"edges\" must be an array");
    for (const auto& e : j["edges"]) {
      if (!e.is_array() || e.size() != 2) throw InputError("edges must be [src, dst] pairs");
      const std::string s = id_from_json(e[0]), d = id_from_json(e[1]);
      auto sv = g.find(s), dv = g.find(d);
      if (!sv || !dv) throw InputError("edge references unknown node '" + (sv ? d : s) + "'");
      g.add_edge(*sv, *dv);
    }
  }
  g.finalize();
  return g;
}

DataGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open graph file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed graph JSON in '" + path + "': " + e.what());
  }
  return graph_from_json(j);
}

static nlohmann::json value_to_json(const Value& v) {
  if (v.is_text()) return v.text();
  if (v.is_int()) return v.integer();
  return v.number();
}

nlohmann::json graph_to_json(const DataGraph& g) {
  nlohmann::json nodes = nlohmann::json::array(), edges = nlohmann::json::array();
  for (NodeId v = 0; v < g.size(); ++v) {
    nlohmann::json attrs = nlohmann::json::object();
    for (const auto& [k, val] : g.attributes(v)) attrs[k] = value_to_json(val);
    nodes.push_back({{"id", g.id(v)}, {"attrs", attrs}});
    for (NodeId w : g.out(v)) edges.push_back({g.id(v), g.id(w)});
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

std::vector<NodeId> candidate_set(const DataGraph& g, const AttributePredicate& p) {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < g.size(); ++v)
    if (g.matches(v, p)) out.push_back(v);
  return out;
}

bool Condensation::acyclic() const {
  return std::find(cyclic.begin(), cyclic.end(), 1) == cyclic.end();
}

Condensation condense(const DataGraph& g) {
  const std::size_t n = g.size();
  constexpr std::uint32_t kNone = ~0u;
  std::vector<std::uint32_t> index(n, kNone), low(n, 0), comp(n, kNone);
  std::vector<char> on_stack(n, 0);
  std::vector<NodeId> stack;
  std::vector<std::pair<NodeId, std::size_t>> call;
  std::vector<std::vector<NodeId>> groups;
  std::uint32_t counter = 0;

  for (NodeId root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      const auto succ = g.out(v);
      if (pos < succ.size()) {
        const NodeId w = succ[pos++];
        if (index[w] == kNone) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const NodeId done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<NodeId> members;
        NodeId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          members.push_back(w);
        } while (w != done);
        std::sort(members.begin(), members.end());
        groups.push_back(std::move(members));
      }
    }
  }

  // Tarjan emits sinks first; reverse to get a topological numbering.
  Condensation c;
  c.comp.assign(n, 0);
  const std::size_t k = groups.size();
  c.members.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    c.members[i] = std::move(groups[k - 1 - i]);
    for (NodeId v : c.members[i]) c.comp[v] = static_cast<std::uint32_t>(i);
  }
  c.cyclic.assign(k, 0);
  c.out.resize(k);
  c.in.resize(k);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId w : g.out(v)) {
      const auto a = c.comp[v], b = c.comp[w];
      if (a == b) {
        c.cyclic[a] = 1;
      } else {
        c.out[a].push_back(b);
        c.in[b].push_back(a);
      }
    }
  }
  for (auto* lists : {&c.out, &c.in}) {
    for (auto& l : *lists) {
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
    }
  }
  return c;
}

}  // namespace gtea

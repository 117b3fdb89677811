#include "gtea/corpus.hpp"

#include <algorithm>
#include <numeric>

namespace gtea {

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
bool chance(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

std::string label(int k) { return std::string(1, static_cast<char>('a' + k)); }

bool formula_has(const Formula& f, Formula::Kind k) {
  if (f.kind() == k) return true;
  for (const auto& g : f.operands())
    if (formula_has(g, k)) return true;
  return false;
}

Formula read_once(std::vector<std::string> vars, const QueryShape& shape, std::mt19937_64& rng) {
  if (vars.size() == 1) {
    Formula v = Formula::var(vars[0]);
    return shape.use_not && chance(rng, 0.35) ? Formula::negate(v) : v;
  }
  std::shuffle(vars.begin(), vars.end(), rng);
  const std::size_t cut = 1 + pick(rng, vars.size() - 1);
  Formula l = read_once({vars.begin(), vars.begin() + cut}, shape, rng);
  Formula r = read_once({vars.begin() + cut, vars.end()}, shape, rng);
  Formula f = shape.use_or && chance(rng, 0.5) ? Formula::disj(l, r) : Formula::conj(l, r);
  return shape.use_not && chance(rng, 0.15) ? Formula::negate(f) : f;
}

Formula structural(const std::vector<std::string>& vars, const QueryShape& shape, std::mt19937_64& rng) {
  if (vars.empty()) return Formula::constant(true);
  if (vars.size() >= 2 && shape.use_not && shape.use_or && chance(rng, 0.12)) {
    // One variable made irrelevant: (g & v) | (g & !v).
    std::vector<std::string> rest(vars.begin() + 1, vars.end());
    Formula g = read_once(rest, shape, rng);
    Formula v = Formula::var(vars[0]);
    return Formula::disj(Formula::conj(g, v), Formula::conj(g, Formula::negate(v)));
  }
  return read_once(vars, shape, rng);
}

}  // namespace

CorpusSpec CorpusSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("corpus spec must be a JSON object");
  CorpusSpec s;
  try {
    s.nodes = j.value("nodes", s.nodes);
    s.density = j.value("density", s.density);
    s.back_edges = j.value("back_edges", s.back_edges);
    s.labels = j.value("labels", s.labels);
    s.levels = j.value("levels", s.levels);
    s.query_min = j.value("query_min", s.query_min);
    s.query_max = j.value("query_max", s.query_max);
    s.not_fraction = j.value("not_fraction", s.not_fraction);
    s.or_fraction = j.value("or_fraction", s.or_fraction);
    s.pc_fraction = j.value("pc_fraction", s.pc_fraction);
    s.instances = j.value("instances", s.instances);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad corpus spec: ") + e.what());
  }
  if (s.density < 0 || s.back_edges < 0 || s.back_edges > 1) throw InputError("bad corpus spec: edge settings out of range");
  if (s.labels < 1 || s.labels > 26 || s.levels < 1) throw InputError("bad corpus spec: labels must be in [1, 26]");
  if (s.query_min < 1 || s.query_max < s.query_min) throw InputError("bad corpus spec: query size range");
  for (double f : {s.not_fraction, s.or_fraction, s.pc_fraction})
    if (f < 0 || f > 1) throw InputError("bad corpus spec: fractions must be in [0, 1]");
  return s;
}

nlohmann::json CorpusSpec::to_json() const {
  return {{"nodes", nodes},          {"density", density},       {"back_edges", back_edges},
          {"labels", labels},        {"levels", levels},         {"query_min", query_min},
          {"query_max", query_max},  {"not_fraction", not_fraction}, {"or_fraction", or_fraction},
          {"pc_fraction", pc_fraction}, {"instances", instances}, {"seed", seed}};
}

DataGraph random_graph(const CorpusSpec& spec, std::mt19937_64& rng) {
  DataGraph g;
  const std::size_t n = spec.nodes;
  for (std::size_t i = 0; i < n; ++i)
    g.add_node("v" + std::to_string(i), {{"label", Value(label(static_cast<int>(pick(rng, spec.labels))))},
                                         {"level", Value(static_cast<std::int64_t>(1 + pick(rng, spec.levels)))}});
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto m = static_cast<std::size_t>(spec.density * static_cast<double>(n) + 0.5);
  if (n >= 2)
    for (std::size_t e = 0; e < m; ++e) {
      std::size_t a = pick(rng, n), b = pick(rng, n);
      if (a == b) continue;
      if (a > b && !chance(rng, spec.back_edges)) std::swap(a, b);
      g.add_edge(order[a], order[b]);
    }
  g.finalize();
  return g;
}

bool has_not(const Query& q) {
  for (const auto& n : q.nodes())
    if (formula_has(n.structural, Formula::Kind::Not)) return true;
  return false;
}

bool has_or(const Query& q) {
  for (const auto& n : q.nodes())
    if (formula_has(n.structural, Formula::Kind::Or)) return true;
  return false;
}

bool has_pc(const Query& q) {
  for (const auto& n : q.nodes())
    if (n.parent >= 0 && n.edge == EdgeType::PC) return true;
  return false;
}

QueryShape random_shape(const CorpusSpec& spec, std::mt19937_64& rng) {
  QueryShape s;
  s.use_not = chance(rng, spec.not_fraction);
  s.use_or = chance(rng, spec.or_fraction);
  s.use_pc = chance(rng, spec.pc_fraction);
  return s;
}

Query random_query(const CorpusSpec& spec, const QueryShape& shape, std::mt19937_64& rng) {
  std::optional<Query> last;
  for (int attempt = 0; attempt < 200; ++attempt) {
    const int k = spec.query_min + static_cast<int>(pick(rng, spec.query_max - spec.query_min + 1));
    std::vector<QueryNode> nodes(k);
    for (int i = 0; i < k; ++i) {
      QueryNode& n = nodes[i];
      n.id = "u" + std::to_string(i + 1);
      if (i > 0) {
        n.parent = static_cast<int>(pick(rng, i));
        const bool under_predicate = !nodes[n.parent].backbone();
        n.kind = under_predicate || chance(rng, 0.55) ? NodeKind::Predicate : NodeKind::Backbone;
        n.edge = shape.use_pc && chance(rng, 0.35) ? EdgeType::PC : EdgeType::AD;
      }
      std::string attr = "label=" + label(static_cast<int>(pick(rng, spec.labels)));
      if (chance(rng, 0.3)) attr += " && level>=" + std::to_string(1 + pick(rng, spec.levels));
      if (chance(rng, 0.1)) attr += " && level<=" + std::to_string(1 + pick(rng, spec.levels));
      n.attr = AttributePredicate::parse(attr);
    }
    std::vector<int> backbone;
    for (int i = 0; i < k; ++i)
      if (nodes[i].backbone()) {
        backbone.push_back(i);
        nodes[i].output = chance(rng, 0.5);
      }
    if (std::none_of(nodes.begin(), nodes.end(), [](const QueryNode& n) { return n.output; }))
      nodes[backbone[pick(rng, backbone.size())]].output = true;
    for (int i = 0; i < k; ++i) {
      std::vector<std::string> vars;
      for (int j = 0; j < k; ++j)
        if (nodes[j].parent == i && !nodes[j].backbone()) vars.push_back(nodes[j].id);
      nodes[i].structural = structural(vars, shape, rng);
    }
    Query q(std::move(nodes));
    if (has_not(q) == shape.use_not && has_or(q) == shape.use_or && has_pc(q) == shape.use_pc) return q;
    last = std::move(q);
  }
  return *last;
}

DataGraph tree_with_cross_edges(std::size_t nodes, std::size_t cross, int labels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DataGraph g;
  std::vector<int> depth(nodes, 0);
  std::vector<NodeId> parent(nodes, 0);
  for (std::size_t i = 1; i < nodes; ++i) {
    parent[i] = static_cast<NodeId>(pick(rng, i));
    depth[i] = depth[parent[i]] + 1;
  }
  for (std::size_t i = 0; i < nodes; ++i)
    g.add_node("n" + std::to_string(i), {{"label", Value(label(depth[i] % labels))},
                                         {"level", Value(static_cast<std::int64_t>(1 + pick(rng, 3)))}});
  for (std::size_t i = 1; i < nodes; ++i) g.add_edge(parent[i], static_cast<NodeId>(i));
  if (nodes >= 2)
    for (std::size_t e = 0; e < cross; ++e) {
      std::size_t a = pick(rng, nodes), b = pick(rng, nodes);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      g.add_edge(static_cast<NodeId>(a), static_cast<NodeId>(b));
    }
  g.finalize();
  return g;
}

}  // namespace gtea

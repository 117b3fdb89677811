#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "gtea/analysis.hpp"
#include "gtea/corpus.hpp"
#include "gtea/engine.hpp"
#include "gtea/oracle.hpp"

using namespace gtea;

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

int cmd_index(const std::string& graph, const std::string& out) {
  DataGraph g = load_graph(graph);
  ReachIndex idx = ReachIndex::build(g);
  write_file(out, idx.to_json().dump() + "\n");
  std::cout << "chains " << idx.chain_count() << "\n"
            << "lout_lists " << idx.lout_lists() << " entries " << idx.lout_entries() << "\n"
            << "lin_lists " << idx.lin_lists() << " entries " << idx.lin_entries() << "\n";
  return 0;
}

int cmd_query(const std::string& graph, const std::string& index, const std::string& query, const std::string& engine,
              bool dedupe, bool stats) {
  DataGraph g = load_graph(graph);
  Query q = Query::load(query);
  QueryAnalysis qa(q);
  if (!qa.satisfiable()) {
    std::cerr << "warning: query is unsatisfiable\n";
    return 0;
  }
  ResultSet rs;
  EngineStats st;
  if (engine == "oracle") {
    rs = oracle_evaluate(g, q);
  } else {
    ReachIndex idx = index.empty() ? ReachIndex::build(g) : ReachIndex::load(g, index);
    EvalOptions opt;
    opt.dedupe = dedupe;
    rs = evaluate(g, idx, q, opt, &st);
  }
  std::vector<std::string> lines;
  if (dedupe) {
    lines = rs.lines(q, g);
  } else {
    // Raw enumeration keeps duplicates; only the order is normalized.
    for (const auto& row : rs.named(q, g)) {
      nlohmann::json j = nlohmann::json::object();
      for (const auto& [k, v] : row) j[k] = v;
      lines.push_back(j.dump());
    }
    std::sort(lines.begin(), lines.end());
  }
  for (const auto& l : lines) std::cout << l << "\n";
  if (stats && engine != "oracle") std::cerr << st.to_json(q).dump() << "\n";
  return 0;
}

int cmd_analyze(const std::string& what, const std::string& query, const std::string& left, const std::string& right) {
  if (what == "sat") {
    QueryAnalysis qa(Query::load(query));
    std::cout << (qa.satisfiable() ? "SATISFIABLE" : "UNSATISFIABLE") << "\n";
    return 0;
  }
  if (what == "min") {
    std::cout << minimize(Query::load(query)).to_json().dump(1) << "\n";
    return 0;
  }
  if (left.empty() || right.empty()) throw InputError("contain needs --left and --right");
  QueryAnalysis a(Query::load(left)), b(Query::load(right));
  auto hom = find_homomorphism(b, a);
  if (!hom) {
    std::cout << "NOT_CONTAINED\n";
    return 0;
  }
  nlohmann::json m = nlohmann::json::object();
  for (const auto& [x, y] : *hom)
    if (y >= 0) m[b.query().id(x)] = a.query().id(y);
  std::cout << "CONTAINED\n" << m.dump() << "\n";
  return 0;
}

int cmd_gen(const std::string& spec_path, const std::string& dir) {
  CorpusSpec spec = CorpusSpec::from_json(read_json(spec_path));
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = 0; i < spec.instances; ++i) {
    DataGraph g = random_graph(spec, rng);
    Query q = random_query(spec, random_shape(spec, rng), rng);
    const std::string n = std::to_string(i);
    write_file(std::filesystem::path(dir) / ("graph_" + n + ".json"), graph_to_json(g).dump(1) + "\n");
    write_file(std::filesystem::path(dir) / ("query_" + n + ".json"), q.to_json().dump(1) + "\n");
  }
  write_file(std::filesystem::path(dir) / "spec.json", spec.to_json().dump(1) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* cap = std::getenv("GTEA_VAR_CAP")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(cap, &end, 10);
    if (end == cap || *end != '\0') {
      std::cerr << "error: GTEA_VAR_CAP must be a number\n";
      return 1;
    }
    set_variable_cap(v);
  }

  CLI::App app{"generalized tree pattern queries over graphs"};
  app.require_subcommand(1);

  auto* index = app.add_subcommand("index", "reachability index");
  auto* build = index->add_subcommand("build", "build an index for a graph");
  index->require_subcommand(1);
  std::string graph, out;
  build->add_option("--graph", graph)->required();
  build->add_option("--out", out)->required();

  auto* query = app.add_subcommand("query", "query evaluation");
  auto* run = query->add_subcommand("run", "evaluate a query");
  query->require_subcommand(1);
  std::string idx_path, query_path, engine = "gtea";
  bool dedupe = true, stats = false;
  run->add_option("--graph", graph)->required();
  run->add_option("--index", idx_path);
  run->add_option("--query", query_path)->required();
  run->add_option("--engine", engine)->check(CLI::IsMember({"gtea", "oracle"}));
  run->add_flag("--dedupe,!--no-dedupe", dedupe);
  run->add_flag("--stats", stats);

  auto* analyze = app.add_subcommand("analyze", "static analysis");
  std::string what, left, right;
  analyze->add_option("what", what)->required()->check(CLI::IsMember({"sat", "min", "contain"}));
  analyze->add_option("--query", query_path);
  analyze->add_option("--left", left);
  analyze->add_option("--right", right);

  auto* gen = app.add_subcommand("gen", "random corpus");
  std::string spec;
  gen->add_option("--spec", spec)->required();
  gen->add_option("--out-dir", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*build) return cmd_index(graph, out);
    if (*run) return cmd_query(graph, idx_path, query_path, engine, dedupe, stats);
    if (*analyze) {
      if (what != "contain" && query_path.empty()) throw InputError(what + " needs --query");
      return cmd_analyze(what, query_path, left, right);
    }
    if (*gen) return cmd_gen(spec, out);
  } catch (const ResourceCapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

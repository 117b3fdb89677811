#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "gtea/data_graph.hpp"
#include "gtea/query.hpp"
#include "json.hpp"

namespace gtea {

struct CorpusSpec {
  std::size_t nodes = 60;
  double density = 1.5;      // edges per node
  double back_edges = 0.0;   // fraction of edges allowed to close cycles
  int labels = 4;
  int levels = 3;            // integer attribute "level" in [1, levels]
  int query_min = 3;
  int query_max = 10;
  double not_fraction = 0.4;
  double or_fraction = 0.4;
  double pc_fraction = 0.3;
  std::size_t instances = 10;
  std::uint64_t seed = 1;

  static CorpusSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct QueryShape {
  bool use_not = false;
  bool use_or = false;
  bool use_pc = false;
};

DataGraph random_graph(const CorpusSpec& spec, std::mt19937_64& rng);
// The query contains every requested feature (NOT, OR, PC edge).
Query random_query(const CorpusSpec& spec, const QueryShape& shape, std::mt19937_64& rng);
QueryShape random_shape(const CorpusSpec& spec, std::mt19937_64& rng);

bool has_not(const Query& q);
bool has_or(const Query& q);
bool has_pc(const Query& q);

// Random recursive tree plus forward cross edges; labels follow depth.
DataGraph tree_with_cross_edges(std::size_t nodes, std::size_t cross, int labels, std::uint64_t seed);

}  // namespace gtea

#pragma once

#include <vector>

#include "gtea/data_graph.hpp"
#include "gtea/query.hpp"
#include "gtea/result.hpp"

namespace gtea {

struct OracleLimits {
  std::size_t max_nodes = 5000;
  std::size_t max_results = 1000000;
};

// Nonempty-path reachability by BFS from every node.
class ClosureMatrix {
 public:
  explicit ClosureMatrix(const DataGraph& g);
  bool reaches(NodeId a, NodeId b) const { return rows_[a][b] != 0; }

 private:
  std::vector<std::vector<char>> rows_;
};

bool oracle_reaches(const DataGraph& g, NodeId a, NodeId b);

// down[u][v] is true iff v downwardly matches u.
std::vector<std::vector<char>> oracle_downward_match(const DataGraph& g, const ClosureMatrix& c, const Query& q);
std::vector<std::vector<char>> oracle_downward_match(const DataGraph& g, const Query& q);

// Throws ResourceCapExceeded past the limits.
ResultSet oracle_evaluate(const DataGraph& g, const Query& q, const OracleLimits& limits = {});

}  // namespace gtea

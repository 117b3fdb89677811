#pragma once

#include <string>
#include <vector>

#include "gtea/data_graph.hpp"
#include "gtea/query.hpp"

namespace gtea {

// Rows are images of `columns` (query node indexes) in the same order.
struct ResultSet {
  std::vector<int> columns;
  std::vector<std::vector<NodeId>> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  void sort_unique();
  // Rows relabelled as {query id: graph id} for comparisons across queries.
  std::vector<std::vector<std::pair<std::string, std::string>>> named(const Query& q, const DataGraph& g) const;
  // One JSON object per row, keys sorted, lines sorted.
  std::vector<std::string> lines(const Query& q, const DataGraph& g) const;
};

}  // namespace gtea

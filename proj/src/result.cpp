#include "gtea/result.hpp"

#include <algorithm>

namespace gtea {

void ResultSet::sort_unique() {
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

std::vector<std::vector<std::pair<std::string, std::string>>> ResultSet::named(const Query& q, const DataGraph& g) const {
  std::vector<std::vector<std::pair<std::string, std::string>>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    std::vector<std::pair<std::string, std::string>> t;
    for (std::size_t i = 0; i < columns.size(); ++i) t.emplace_back(q.id(columns[i]), g.id(r[i]));
    std::sort(t.begin(), t.end());
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> ResultSet::lines(const Query& q, const DataGraph& g) const {
  std::vector<std::string> out;
  for (const auto& t : named(q, g)) {
    nlohmann::json o = nlohmann::json::object();
    for (const auto& [k, v] : t) o[k] = v;
    out.push_back(o.dump());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gtea

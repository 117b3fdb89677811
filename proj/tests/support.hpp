#pragma once

#include <random>
#include <string>
#include <vector>

#include "gtea/data_graph.hpp"

std::string fixture(const std::string& name);

std::vector<std::string> names(const gtea::DataGraph& g, std::vector<gtea::NodeId> nodes);

gtea::DataGraph random_digraph(std::mt19937& rng, std::size_t n, std::size_t m);
gtea::DataGraph random_dag(std::mt19937& rng, std::size_t n, double density);

// closure[a][b] is true iff a nonempty path leads from a to b.
std::vector<std::vector<char>> bfs_closure(const gtea::DataGraph& g);

#include "gtea/analysis.hpp"

// Applies one or two edits that usually narrow the answer set.
gtea::Query strengthen(const gtea::Query& q, std::mt19937_64& rng);

// Every answer of `narrow` is an answer of `wide`, with wide's outputs
// renamed through `lambda` (a homomorphism from wide into narrow).
bool answers_contained(const gtea::Query& narrow, const gtea::Query& wide, const gtea::NodeMap& lambda,
                       const gtea::DataGraph& g);

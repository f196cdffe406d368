#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <cstdint>
#include <vector>

#include "byzset/graph.hpp"
#include "byzset/random.hpp"

namespace byzset::testing {

/// Each ordered pair becomes an edge with probability num/den.
inline CommGraph random_graph(std::size_t n, Rng& rng, std::uint64_t num = 1, std::uint64_t den = 2) {
  std::vector<Edge> edges;
  for (AgentId i = 0; i < n; ++i)
    for (AgentId j = 0; j < n; ++j)
      if (i != j && rng.chance(num, den)) edges.push_back({i, j});
  return CommGraph(n, edges);
}

/// Graph whose edge set is the bit pattern `code` over the n(n-1) ordered pairs.
inline CommGraph graph_from_code(std::size_t n, std::uint64_t code) {
  std::vector<Edge> edges;
  std::size_t bit = 0;
  for (AgentId i = 0; i < n; ++i)
    for (AgentId j = 0; j < n; ++j) {
      if (i == j) continue;
      if ((code >> bit) & 1U) edges.push_back({i, j});
      ++bit;
    }
  return CommGraph(n, edges);
}

/// Brute-force: does `from` reach `to` avoiding `removed`?
inline bool reaches(const CommGraph& g, AgentId from, AgentId to, AgentSet removed = {}) {
  AgentSet seen = AgentSet::single(from);
  std::vector<AgentId> stack{from};
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (auto w : g.out_neighbors(v) - removed - seen) {
      seen.insert(w);
      stack.push_back(w);
    }
  }
  return seen.contains(to);
}

/// Smallest vertex set (excluding x, y) whose removal cuts every x -> y path.
inline std::size_t brute_cut(const CommGraph& g, AgentId x, AgentId y) {
  std::size_t best = g.size();
  for_each_subset(g.agents() - AgentSet{x, y}, [&](AgentSet removed) {
    if (removed.size() < best && !reaches(g, x, y, removed)) best = removed.size();
  });
  return best;
}

}  // namespace byzset::testing

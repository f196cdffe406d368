#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "byzset/graph.hpp"

namespace byzset {

/// A partition violating the in-neighbor threshold. `left_clause` is true
/// when no node of L has enough in-neighbors in R (|R| large enough), false
/// for the mirrored clause.
struct PartitionWitness {
  Partition partition;
  std::size_t threshold = 0;
  bool left_clause = true;
};

/// Removing `separating_set` leaves no directed path from -> to. For complete
/// graphs no separating set exists; `complete_graph` marks that case and the
/// verdict rests on the n-1 convention alone.
struct CutWitness {
  AgentSet separating_set;
  AgentId from = 0;
  AgentId to = 0;
  bool complete_graph = false;
};

struct ConditionVerdict {
  bool holds = true;
  std::variant<std::monostate, PartitionWitness, SourceWitness, CutWitness> witness;
};

/// For every partition (L, R, F) with |F| <= f: if |R| >= threshold some i in L
/// has |N_i ∩ R| >= threshold, and symmetrically. Clauses over an empty side
/// hold vacuously. First violation in partition order is the witness.
ConditionVerdict check_partition_threshold(const CommGraph& g, std::size_t f, std::size_t threshold);
/// Re-checks a single partition against the threshold.
bool partition_violates(const CommGraph& g, const PartitionWitness& w);

ConditionVerdict check_condition_a(const CommGraph& g, std::size_t f);
ConditionVerdict check_condition_async(const CommGraph& g, std::size_t f);

/// Every source component of every reduced graph has at least n - 2f nodes.
ConditionVerdict check_condition_b(const CommGraph& g, std::size_t f,
                                   const EnumerationBudget& budget = EnumerationBudget::from_env(),
                                   SearchMethod method = SearchMethod::Candidates);
bool violates_condition_b(const CommGraph& g, std::size_t f, const SourceWitness& w);

/// True iff every nonempty reduced graph has exactly one source component.
bool single_source_check(const CommGraph& g, std::size_t f,
                         const EnumerationBudget& budget = EnumerationBudget::from_env());

// ---------------------------------------------------------------------------
// Connectivity

struct DisjointPathSet {
  AgentId source = 0;
  AgentId sink = 0;
  std::vector<std::vector<AgentId>> paths;
};

/// Number of internally vertex-disjoint x -> y paths (a direct edge counts as one).
std::size_t max_disjoint_paths(const CommGraph& g, AgentId x, AgentId y);

/// Up to k internally vertex-disjoint x -> y paths, sorted by length then
/// lexicographically. Throws GraphError when x == y.
DisjointPathSet disjoint_paths(const CommGraph& g, AgentId x, AgentId y, std::size_t k);

/// Whether the paths are real x -> y paths sharing only their endpoints.
bool valid_disjoint_paths(const CommGraph& g, const DisjointPathSet& s);

/// Minimum set of nodes (excluding x and y) whose removal cuts every x -> y
/// path. Throws GraphError when x == y or (x, y) is an edge.
AgentSet min_vertex_cut(const CommGraph& g, AgentId x, AgentId y);

/// Largest k such that g is k-connected; n - 1 for complete graphs.
/// Throws GraphError when n < 2.
std::size_t vertex_connectivity(const CommGraph& g);

ConditionVerdict check_connectivity(const CommGraph& g, std::size_t k);

}  // namespace byzset

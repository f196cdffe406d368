#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "byzset/index_set.hpp"
#include "byzset/text.hpp"

namespace byzset {

struct Edge {
  AgentId from = 0;
  AgentId to = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Directed communication graph over agents 0..n-1. An edge (i, j) means
/// i can send to j. Immutable once built.
class CommGraph {
 public:
  CommGraph() = default;
  /// Throws GraphError on self-loops, out-of-range endpoints or n > 64.
  /// Duplicate edges are merged.
  CommGraph(std::size_t n, std::span<const Edge> edges);

  std::size_t size() const { return in_.size(); }
  AgentSet agents() const { return AgentSet::range(size()); }
  AgentSet in_neighbors(AgentId i) const;
  AgentSet out_neighbors(AgentId i) const;
  bool has_edge(AgentId from, AgentId to) const;
  std::size_t edge_count() const;
  /// Sorted by (from, to).
  std::vector<Edge> edges() const;
  std::span<const AgentSet> in_masks() const { return in_; }

  static CommGraph complete(std::size_t n);
  static CommGraph cycle(std::size_t n);

  friend bool operator==(const CommGraph&, const CommGraph&) = default;

 private:
  std::vector<AgentSet> in_;
  std::vector<AgentSet> out_;
};

CommGraph build_graph(std::size_t n, std::span<const Edge> edges);
inline CommGraph build_graph(std::size_t n, std::initializer_list<Edge> edges) {
  return build_graph(n, std::span<const Edge>(edges.begin(), edges.size()));
}
AgentSet incoming_neighbors(const CommGraph& g, AgentId i);

/// A graph file: `n <count> f <bound>` followed by `edge <src> <dst>` lines.
struct GraphFile {
  CommGraph graph;
  std::size_t f = 0;
};
GraphFile parse_graph_text(std::string_view text);
/// Same grammar over pre-tokenized lines.
GraphFile parse_graph_lines(const std::vector<text::Line>& lines);
std::string format_graph_text(const CommGraph& g, std::size_t f);

// ---------------------------------------------------------------------------
// Strongly connected components

/// Components are listed by their lowest member; dag_edges are sorted
/// (k, l) pairs of component indices, one per crossing.
struct Decomposition {
  std::vector<AgentSet> components;
  std::vector<std::pair<std::size_t, std::size_t>> dag_edges;
};

/// Decomposes the subgraph induced on `nodes`, where `in_masks[i]` lists
/// the in-neighbors of node i (members outside `nodes` are ignored).
Decomposition decompose_scc(AgentSet nodes, std::span<const AgentSet> in_masks);
Decomposition decompose_scc(const CommGraph& g);

/// Components with no incoming condensation edge.
std::vector<AgentSet> source_components(const Decomposition& d);

/// Whether the subgraph induced on `nodes` is strongly connected.
bool strongly_connected(AgentSet nodes, std::span<const AgentSet> in_masks);
/// Nodes reachable from `start` inside `nodes` (start included).
AgentSet reachable_from(AgentId start, AgentSet nodes, std::span<const AgentSet> in_masks);

// ---------------------------------------------------------------------------
// Reduced graphs

/// G_F: the faulty set removed together with its links, then up to f further
/// incoming links dropped at each survivor. Self-contained value type; it
/// keeps a copy of the base in-neighborhoods it was derived from.
class ReducedGraph {
 public:
  ReducedGraph(const CommGraph& base, AgentSet faulty, std::vector<AgentSet> surviving_in);

  std::size_t size() const { return base_in_.size(); }
  AgentSet faulty() const { return faulty_; }
  AgentSet nodes() const { return AgentSet::range(size()) - faulty_; }
  std::span<const AgentSet> in_masks() const { return in_; }
  std::vector<Edge> edges() const;
  /// Base edges between survivors that this reduction dropped.
  std::vector<Edge> removed_edges() const;
  Decomposition decompose() const { return decompose_scc(nodes(), in_); }
  /// Per-survivor deletion budget respected and no faulty node present.
  bool valid_reduction(std::size_t f) const;

  friend bool operator==(const ReducedGraph&, const ReducedGraph&) = default;

 private:
  std::vector<AgentSet> base_in_;  // base in-neighbors restricted to survivors
  AgentSet faulty_;
  std::vector<AgentSet> in_;
};

/// Caps exhaustive enumerations. The default matches the CLI default.
struct EnumerationBudget {
  std::uint64_t max_items = 1'000'000;
  /// Reads BYZSET_BUDGET when set, else the default.
  static EnumerationBudget from_env();
  static EnumerationBudget unlimited() { return {~std::uint64_t{0}}; }
};

/// Number of reduced graphs for a fixed F (saturates at UINT64_MAX).
std::uint64_t count_reduced_graphs(const CommGraph& g, AgentSet faulty, std::size_t f);

/// Lazily yields every reduced graph of g for a fixed F. Order: node index
/// lexicographic (highest index varies fastest), per node by removal bitmask.
class ReducedGraphStream {
 public:
  /// Throws ValidationError when |F| > f.
  ReducedGraphStream(const CommGraph& g, AgentSet faulty, std::size_t f);
  std::optional<ReducedGraph> next();

 private:
  const CommGraph* graph_;
  AgentSet faulty_;
  std::vector<AgentSet> surviving_in_;
  std::vector<std::vector<AgentSet>> removals_;  // per node, candidate removal sets
  std::vector<std::size_t> cursor_;
  bool done_ = false;
};

ReducedGraphStream enumerate_reduced_graphs(const CommGraph& g, AgentSet faulty, std::size_t f);

/// Every F with |F| <= f, ordered by size then bitmask.
std::vector<AgentSet> fault_placements(std::size_t n, std::size_t f);

// ---------------------------------------------------------------------------
// Source components across all reduced graphs

/// A node set that is a source component of some reduced graph for `faulty`.
struct SourceCandidate {
  AgentSet faulty;
  AgentSet component;
  friend bool operator==(const SourceCandidate&, const SourceCandidate&) = default;
  friend auto operator<=>(const SourceCandidate&, const SourceCandidate&) = default;
};

/// A concrete reduced graph together with one of its source components.
struct SourceWitness {
  ReducedGraph reduced;
  AgentSet component;
};

/// C is a source component of some reduced graph for F iff G[C] is strongly
/// connected and every i in C has at most f in-neighbors in V \ (F u C).
bool is_realizable_source(const CommGraph& g, std::size_t f, AgentSet faulty, AgentSet component);

/// The reduced graph that keeps everything except the links entering the
/// candidate from the rest of the survivors.
ReducedGraph realize_source(const CommGraph& g, const SourceCandidate& candidate);

/// Candidate search versus the literal reduced-graph walk.
enum class SearchMethod { Candidates, Exhaustive };

using SourceVisitor = std::function<bool(const SourceCandidate&)>;

/// Visits every realizable (F, C) pair: F by size then bitmask, C by bitmask.
/// Returns false if the visitor stopped early. Throws BudgetExceeded when
/// the number of (F, C) pairs to examine exceeds the budget.
bool for_each_realizable_source(const CommGraph& g, std::size_t f, const EnumerationBudget& budget,
                                const SourceVisitor& visit);

/// Brute-force reference: walks every reduced graph of every F and reports
/// each of its source components (duplicates included).
bool for_each_source_exhaustive(const CommGraph& g, std::size_t f, const EnumerationBudget& budget,
                                const std::function<bool(const ReducedGraph&, AgentSet)>& visit);

// ---------------------------------------------------------------------------
// Partitions

/// L, R, F pairwise disjoint and covering all agents.
struct Partition {
  AgentSet left;
  AgentSet right;
  AgentSet faulty;
  friend bool operator==(const Partition&, const Partition&) = default;
};

/// Visits every partition with |F| <= f: F by size then bitmask, then L as
/// a subset of the survivors by bitmask. Stops when `visit` returns false.
bool for_each_partition(std::size_t n, std::size_t f, const std::function<bool(const Partition&)>& visit);
std::vector<Partition> enumerate_partitions(const CommGraph& g, std::size_t f);

}  // namespace byzset

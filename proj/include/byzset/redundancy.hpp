#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "byzset/graph.hpp"
#include "byzset/text.hpp"

namespace byzset {

/// Ordered, duplicate-free list of value tokens; a ValueSet indexes into it.
class Universe {
 public:
  Universe() = default;
  /// Throws ValidationError on empty, duplicate, malformed or > 64 tokens.
  explicit Universe(std::vector<std::string> tokens);
  /// a, b, ..., z, v26, v27, ...
  static Universe of_size(std::size_t k);

  std::size_t size() const { return tokens_.size(); }
  ValueSet all() const { return ValueSet::range(size()); }
  const std::string& token(ValueId v) const { return tokens_.at(v); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<ValueId> find(std::string_view token) const;

  /// Space-separated tokens in universe order; empty string for the empty set.
  std::string format(ValueSet s) const;

  friend bool operator==(const Universe&, const Universe&) = default;

 private:
  std::vector<std::string> tokens_;
};

struct SetInstance {
  Universe universe;
  std::vector<ValueSet> locals;  // X_i, indexed by agent
  std::size_t f = 0;

  std::size_t size() const { return locals.size(); }
  AgentSet agents() const { return AgentSet::range(size()); }
  /// Throws ValidationError if a local set leaves the universe or n > 64.
  void validate() const;

  friend bool operator==(const SetInstance&, const SetInstance&) = default;
};

/// `universe a b c`, `f <k>`, `agent <id>: a c`. Agent ids must be 0..n-1.
SetInstance parse_instance_text(std::string_view text);
/// Same grammar over pre-tokenized lines; unknown keywords are errors.
SetInstance parse_instance_lines(const std::vector<text::Line>& lines);
std::string format_instance_text(const SetInstance& inst);

/// Intersection of the local sets of S. Throws ValidationError on empty S.
ValueSet intersect(const SetInstance& inst, AgentSet S);
/// Like intersect, but the empty family yields the whole universe.
ValueSet intersect_or_universe(const SetInstance& inst, AgentSet S);

// ---------------------------------------------------------------------------

enum class WitnessKind {
  EmptyIntersection,  // agents: the set whose intersection is empty
  Subset,             // value in the intersection over agents but not globally
  Absence,            // value outside the intersection, lacking only at agents
  SourceComponent,    // value held throughout the source component `agents`
  Unequal,            // agents {i, j} whose local sets differ at value
};

struct RedundancyWitness {
  WitnessKind kind = WitnessKind::EmptyIntersection;
  std::optional<ValueId> value;
  AgentSet agents;
  std::size_t threshold = 0;          // Absence only
  std::optional<ReducedGraph> reduced;  // SourceComponent only
};

struct RedundancyVerdict {
  bool holds = true;
  std::optional<RedundancyWitness> witness;
};

/// Global intersection nonempty and every S with |S| >= n - 2f intersects to
/// it. Subsets are scanned by size descending, then bitmask; the empty
/// family (possible when n <= 2f) intersects to the universe.
RedundancyVerdict check_property_b(const SetInstance& inst,
                                   const EnumerationBudget& budget = EnumerationBudget::from_env());

/// Global intersection nonempty and every value outside it is absent from at
/// least `threshold` local sets. Values are scanned in universe order.
RedundancyVerdict check_absence_threshold(const SetInstance& inst, std::size_t threshold);
RedundancyVerdict check_property_c(const SetInstance& inst);
RedundancyVerdict check_3f_redundancy(const SetInstance& inst);

/// For every F (|F| <= f, F != V), every reduced graph and every source
/// component C: each value outside the intersection over V \ F is missing
/// somewhere in C.
RedundancyVerdict check_property_d(const SetInstance& inst, const CommGraph& g,
                                   const EnumerationBudget& budget = EnumerationBudget::from_env(),
                                   SearchMethod method = SearchMethod::Candidates);

/// All local sets identical (the only runnable inputs when n <= 2f + 1).
RedundancyVerdict check_equal_sets(const SetInstance& inst);

/// check_property_b(inst).holds == check_property_c(inst).holds
bool equivalence_bc(const SetInstance& inst);

/// Re-checks a witness against the instance (and graph for SourceComponent).
bool confirms_violation(const SetInstance& inst, const RedundancyWitness& w, const CommGraph* g = nullptr);

// ---------------------------------------------------------------------------

struct InstanceTarget {
  enum class Kind { SatisfyC, ViolateC, SatisfyD, EqualSets, Satisfy3F };
  Kind kind = Kind::SatisfyC;
  std::optional<CommGraph> graph;  // SatisfyD only

  static InstanceTarget satisfy_c() { return {Kind::SatisfyC, std::nullopt}; }
  static InstanceTarget violate_c() { return {Kind::ViolateC, std::nullopt}; }
  static InstanceTarget satisfy_d(CommGraph g) { return {Kind::SatisfyD, std::move(g)}; }
  static InstanceTarget equal_sets() { return {Kind::EqualSets, std::nullopt}; }
  /// Every value outside the core is missing from at least 3f + 1 agents.
  static InstanceTarget satisfy_3f() { return {Kind::Satisfy3F, std::nullopt}; }
};

/// Deterministic in seed. Throws ValidationError for unsatisfiable targets.
SetInstance generate_instance(std::size_t universe_size, std::size_t n, std::size_t f, const InstanceTarget& target,
                              std::uint64_t seed);

}  // namespace byzset

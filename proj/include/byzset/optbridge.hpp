#pragma once

// Byzantine optimization on a finite 1-D integer grid, reduced to set
// intersection over argmin sets.

#include <cstdint>
#include <compare>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "byzset/adversary.hpp"
#include "byzset/protocols.hpp"
#include "byzset/redundancy.hpp"

namespace byzset {

/// Exact rational with positive denominator, always in lowest terms.
class Rational {
 public:
  Rational(std::int64_t num = 0, std::int64_t den = 1);
  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  friend Rational operator+(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend bool operator==(Rational a, Rational b) = default;
  friend std::strong_ordering operator<=>(Rational a, Rational b);
  std::string str() const;

 private:
  std::int64_t num_;
  std::int64_t den_;
};

using Point = std::int64_t;
using PointSet = std::set<Point>;

/// The points lo, lo+1, ..., hi.
struct GridDomain {
  Point lo = 0;
  Point hi = 0;
  GridDomain() = default;
  /// Throws ValidationError when hi < lo.
  GridDomain(Point lo, Point hi);
  std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
  Point at(std::size_t k) const { return lo + static_cast<Point>(k); }
  bool contains(Point x) const { return lo <= x && x <= hi; }
  PointSet all() const;
  friend bool operator==(const GridDomain&, const GridDomain&) = default;
};

/// Q(x) = squared distance from x to the argmin set: zero exactly there.
class CostFunction {
 public:
  /// Throws ValidationError on an empty argmin set or points off the grid.
  CostFunction(const GridDomain& domain, PointSet argmin);
  Rational at(Point x) const { return values_.at(static_cast<std::size_t>(x - lo_)); }
  const PointSet& argmin_set() const { return argmin_; }
  friend bool operator==(const CostFunction&, const CostFunction&) = default;

 private:
  Point lo_ = 0;
  std::vector<Rational> values_;
  PointSet argmin_;
};

struct CostProfile {
  GridDomain domain;
  std::vector<CostFunction> costs;  // Q_i, indexed by agent
  std::size_t f = 0;
  std::size_t size() const { return costs.size(); }
  AgentSet agents() const { return AgentSet::range(size()); }
  friend bool operator==(const CostProfile&, const CostProfile&) = default;
};

/// `domain <lo>..<hi>`, `f <k>`, `agent <id> argmin: <points>`.
CostProfile parse_profile_text(std::string_view text);
CostProfile parse_profile_lines(const std::vector<text::Line>& lines);
std::string format_profile_text(const CostProfile& p);

/// Exact argmin of the summed costs over S. Throws ValidationError on empty S.
PointSet aggregate_argmin(const CostProfile& p, AgentSet S);
/// Intersection of the individual argmin sets over S.
PointSet argmin_intersection(const CostProfile& p, AgentSet S);

/// The identity is conditional; an empty argmin intersection is reported with
/// this error rather than a false result.
class LemmaPrecondition : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// aggregate_argmin(p, S) == intersection of argmin sets over S.
bool check_lemma1(const CostProfile& p, AgentSet S);

struct ProfileWitness {
  AgentSet subset;  // S (Property A) or the source component (Property E)
  AgentSet faulty;  // Property E only
  PointSet got;
  PointSet expected;
};

struct ProfileVerdict {
  bool holds = true;
  std::optional<ProfileWitness> witness;
};

/// Global argmin intersection nonempty and every S with |S| >= n - 2f
/// minimizes to the same set as all of V. The empty S (possible when n <= 2f)
/// minimizes to the whole domain.
ProfileVerdict check_property_a(const CostProfile& p, const EnumerationBudget& budget = EnumerationBudget::from_env());
/// Every source component S of every reduced graph for every F (F != V):
/// aggregate_argmin(S) == aggregate_argmin(V \ F).
ProfileVerdict check_property_e(const CostProfile& p, const CommGraph& g,
                                const EnumerationBudget& budget = EnumerationBudget::from_env());

/// Universe = grid points (token = decimal point), locals = argmin sets.
/// Throws ValidationError when the grid has more than 64 points.
SetInstance lift_to_instance(const CostProfile& p);
/// Domain 0..k-1 over the universe order; every local must be nonempty.
CostProfile lift_to_profile(const SetInstance& inst);

/// A lifted generated instance on the grid 0..K. Every argmin set is
/// nonempty and a common point is forced in, so the global argmin
/// intersection is nonempty.
CostProfile generate_profile(Point K, std::size_t n, std::size_t f, const InstanceTarget& target, std::uint64_t seed);

struct OptimizationRun {
  std::vector<std::optional<Point>> outputs;  // nullopt for faulty agents or an empty agreed set
  Execution execution;
  bool converged = false;
};

/// Runs the constrained protocol on the argmin sets and outputs the smallest
/// point of each non-faulty agent's final set.
OptimizationRun solve_byz_opt(const CommGraph& g, const CostProfile& p, AgentSet faulty,
                              const AdversaryStrategy& adversary);

}  // namespace byzset

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "byzset/adversary.hpp"
#include "byzset/simnet.hpp"

namespace byzset {

// ---------------------------------------------------------------------------
// Centralized subset agreement

struct CentralizedResult {
  std::optional<ValueSet> value;  // nullopt: no quorum qualifies
  std::optional<AgentSet> chosen;
};

/// Scans T with |T| = n - f in increasing bitmask order and returns Y_T for
/// the first T whose sub-intersections over every T' ⊆ T with
/// |T'| >= max(1, n - 2f) all agree. Throws ValidationError when `reported`
/// does not cover every agent.
CentralizedResult run_centralized(const SetInstance& inst, const std::vector<ValueSet>& reported);
/// Every qualifying T, in scan order.
std::vector<AgentSet> qualifying_quorums(const SetInstance& inst, const std::vector<ValueSet>& reported);

// ---------------------------------------------------------------------------
// Constrained iterative removal

/// local minus every y in local missing from at least `threshold` received sets.
ValueSet constrained_update(ValueSet local, const std::map<AgentId, ValueSet>& received, std::size_t threshold);

struct ConstrainedOptions {
  std::size_t max_rounds = 0;  // 0: n
  std::size_t threshold = 0;   // 0: f + 1
  bool stop_when_done = true;
};

/// Lock-step constrained protocol. Missing messages count as the universe.
class ConstrainedProtocol : public SyncProtocol {
 public:
  explicit ConstrainedProtocol(std::size_t threshold = 0) : threshold_(threshold) {}
  void start(const CommGraph& g, const SetInstance& inst, AgentSet faulty) override;
  std::vector<Message> emit(std::size_t round, AgentId i) override;
  void receive(std::size_t round, AgentId i, std::span<const Message> inbox) override;
  ValueSet state(AgentId i) const override { return local_[i]; }
  std::optional<ValueSet> output(AgentId i) const override { return local_[i]; }
  bool done(std::size_t round) const override;

 private:
  const CommGraph* g_ = nullptr;
  std::size_t threshold_;
  std::size_t active_threshold_ = 0;
  ValueSet universe_;
  ValueSet target_;
  AgentSet honest_;
  std::vector<ValueSet> local_;
};

Execution run_constrained(const CommGraph& g, const SetInstance& inst, AgentSet faulty,
                          const AdversaryStrategy& adversary, const ConstrainedOptions& options = {});

// ---------------------------------------------------------------------------
// Unconstrained: disjoint-path flooding plus the absence filter

/// routes[(j, i)]: the direct link [j, i] when it exists, else 2f + 1
/// internally disjoint paths from j to i.
using RouteTable = std::map<std::pair<AgentId, AgentId>, std::vector<std::vector<AgentId>>>;

/// Throws ValidationError when some non-adjacent pair lacks 2f + 1 disjoint paths.
RouteTable build_routes(const CommGraph& g, std::size_t f);

/// A relayed copy as it reached its destination.
struct ReceivedCopy {
  std::vector<AgentId> route;  // claimed path including the destination
  ValueSet payload;
};

/// Z_j from the copies of j's set that reached i: the payload carried by at
/// least f + 1 distinct precomputed routes, else the empty set. Copies whose
/// route is not one of routes(j, i) are ignored.
ValueSet resolve_copies(const std::vector<ReceivedCopy>& copies, const std::vector<std::vector<AgentId>>& routes,
                        std::size_t f);

/// { y in local : |{ k != self : y not in z[k] }| <= f }.
ValueSet absence_filter(ValueSet local, const std::vector<ValueSet>& z, AgentId self, std::size_t f);

class UnconstrainedProtocol : public SyncProtocol {
 public:
  void start(const CommGraph& g, const SetInstance& inst, AgentSet faulty) override;
  std::vector<Message> emit(std::size_t round, AgentId i) override;
  void receive(std::size_t round, AgentId i, std::span<const Message> inbox) override;
  ValueSet state(AgentId i) const override { return decided_[i] ? *decided_[i] : local_[i]; }
  std::optional<ValueSet> output(AgentId i) const override { return decided_[i]; }
  bool done(std::size_t round) const override { return round >= horizon_; }

  /// Rounds until every route has delivered.
  std::size_t horizon() const { return horizon_; }
  /// stored(i)[j] = Z_j as resolved by agent i (after the horizon).
  const std::vector<ValueSet>& stored(AgentId i) const { return z_[i]; }

 private:
  const CommGraph* g_ = nullptr;
  std::size_t f_ = 0;
  RouteTable routes_;
  std::size_t horizon_ = 0;
  ValueSet universe_;
  std::vector<ValueSet> local_;
  std::vector<std::optional<ValueSet>> decided_;
  std::vector<std::vector<Message>> outbox_;
  std::vector<std::map<AgentId, ValueSet>> direct_;
  std::vector<std::map<AgentId, std::vector<ReceivedCopy>>> copies_;
  std::vector<std::vector<ValueSet>> z_;
  std::vector<std::set<std::pair<RelayHeader, std::uint64_t>>> forwarded_;
};

struct UnconstrainedRun {
  Execution execution;
  std::vector<std::vector<ValueSet>> stored;  // stored[i][j]; empty rows for faulty i
};

/// Throws ValidationError when the graph lacks the disjoint routes.
UnconstrainedRun run_unconstrained(const CommGraph& g, const SetInstance& inst, AgentSet faulty,
                                   const AdversaryStrategy& adversary);

// ---------------------------------------------------------------------------
// Asynchronous constrained

struct AsyncConstrainedOptions {
  std::size_t threshold = 0;  // 0: f + 1
  std::size_t max_steps = 0;  // 0: 4n
};

/// Waits for |N_i| - f current-step messages (at least one), then applies
/// constrained_update to every current-step message present.
class AsyncConstrainedProtocol : public AsyncProtocol {
 public:
  explicit AsyncConstrainedProtocol(std::size_t threshold = 0) : threshold_(threshold) {}
  void start(const CommGraph& g, const SetInstance& inst, AgentSet faulty) override;
  ValueSet outgoing(AgentId i) const override { return local_[i]; }
  std::size_t quorum(AgentId i) const override;
  void advance(AgentId i, const std::map<AgentId, ValueSet>& received) override;
  ValueSet state(AgentId i) const override { return local_[i]; }

 private:
  const CommGraph* g_ = nullptr;
  std::size_t f_ = 0;
  std::size_t threshold_;
  std::size_t active_threshold_ = 0;
  std::vector<ValueSet> local_;
};

Execution run_constrained_async(const CommGraph& g, const SetInstance& inst, AgentSet faulty,
                                const AdversaryStrategy& adversary, const DeliverySchedule& schedule,
                                const AsyncConstrainedOptions& options = {});

// ---------------------------------------------------------------------------
// Necessity: two executions the victim cannot tell apart

struct NecessityDemo {
  NecessityScenario scenario;
  Execution a;
  Execution b;
  bool victim_indistinguishable = false;
  ValueSet correct_a;  // non-faulty intersection of scenario a
  ValueSet correct_b;
  std::optional<AgentId> distinguishing_agent;  // an agent whose views differ
};

/// Runs both scenarios of `s` with the constrained protocol for n rounds.
/// Scenario b's faulty agents replay their scenario-a sends.
NecessityDemo demonstrate_necessity(const CommGraph& g, const NecessityScenario& s);

}  // namespace byzset

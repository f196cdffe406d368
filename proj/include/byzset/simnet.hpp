#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "byzset/adversary.hpp"
#include "byzset/message.hpp"
#include "byzset/redundancy.hpp"

namespace byzset {

enum class EventKind { Send, Deliver, StateChange, Decide };

/// One transcript line. For state_change and decide, sender == receiver ==
/// the agent. `tag` is the logical step of an async message.
struct Event {
  std::size_t step = 0;
  EventKind kind = EventKind::Send;
  AgentId sender = 0;
  AgentId receiver = 0;
  ValueSet payload;
  std::optional<RelayHeader> relay;
  std::optional<std::size_t> tag;
  friend bool operator==(const Event&, const Event&) = default;
};

struct Transcript {
  std::vector<Event> events;
  friend bool operator==(const Transcript&, const Transcript&) = default;
};

/// `<step> <kind> <sender> <receiver> <tokens or ->` plus ` t=<tag>` and
/// ` @ <origin> <destination> <path...>` when present. One event per line.
std::string dump_transcript(const Transcript& t, const Universe& u);
/// FNV-1a over the dump.
std::uint64_t transcript_digest(const Transcript& t, const Universe& u);

/// Events agent i observes: deliveries to i and its own state/decide events.
std::vector<Event> view_of(const Transcript& t, AgentId i);
bool indistinguishable(const Transcript& a, const Transcript& b, AgentId i);

struct ProtocolOutcome {
  std::vector<std::optional<ValueSet>> decided;  // nullopt for faulty agents
  std::size_t rounds_elapsed = 0;
  bool converged = false;  // every non-faulty output equals the non-faulty intersection
  ValueSet target;         // the non-faulty intersection
};

struct Execution {
  ProtocolOutcome outcome;
  Transcript transcript;
};

// ---------------------------------------------------------------------------
// Synchronous rounds

/// A protocol as per-agent state machines. Faulty agents keep running an
/// honest shadow copy; the engine routes their emissions through the adversary.
class SyncProtocol {
 public:
  virtual ~SyncProtocol() = default;
  virtual void start(const CommGraph& g, const SetInstance& inst, AgentSet faulty) = 0;
  /// Messages agent i sends in round t (t >= 1). `to` must be an out-neighbor.
  virtual std::vector<Message> emit(std::size_t round, AgentId i) = 0;
  /// Everything delivered to i in round t, ordered by sender.
  virtual void receive(std::size_t round, AgentId i, std::span<const Message> inbox) = 0;
  virtual ValueSet state(AgentId i) const = 0;
  /// The agent's output once it has one.
  virtual std::optional<ValueSet> output(AgentId i) const = 0;
  /// Whether the run may stop after round t (t = 0 checks the initial state).
  virtual bool done(std::size_t round) const = 0;
};

struct SyncOptions {
  std::size_t max_rounds = 0;
  bool stop_when_done = true;
};

/// Lock-step rounds: all sends, then all deliveries, then all state updates.
/// Throws ValidationError if |F| > f or a message leaves the graph.
Execution run_sync(const CommGraph& g, SyncProtocol& protocol, const SetInstance& inst, AgentSet faulty,
                   const AdversaryStrategy& adversary, const SyncOptions& options);

// ---------------------------------------------------------------------------
// Asynchronous delivery

class AsyncProtocol {
 public:
  virtual ~AsyncProtocol() = default;
  virtual void start(const CommGraph& g, const SetInstance& inst, AgentSet faulty) = 0;
  /// Payload agent i broadcasts for its current step.
  virtual ValueSet outgoing(AgentId i) const = 0;
  /// Number of current-step messages agent i waits for.
  virtual std::size_t quorum(AgentId i) const = 0;
  /// Applies one step using every current-step message present.
  virtual void advance(AgentId i, const std::map<AgentId, ValueSet>& received) = 0;
  virtual ValueSet state(AgentId i) const = 0;
};

/// Fair adversarial delivery. Delays are drawn per message from the seed;
/// starved links never deliver (at most f per receiver, edges only).
struct DeliverySchedule {
  enum class Policy { Synchronous, RandomDelay, Starve };
  Policy policy = Policy::Synchronous;
  std::uint64_t seed = 0;
  std::size_t max_delay = 1;
  std::set<std::pair<AgentId, AgentId>> starved;

  static DeliverySchedule synchronous() { return {}; }
  static DeliverySchedule random_delay(std::size_t max_delay, std::uint64_t seed) {
    return {Policy::RandomDelay, seed, max_delay, {}};
  }
  static DeliverySchedule starve(std::size_t max_delay, std::set<std::pair<AgentId, AgentId>> links,
                                 std::uint64_t seed) {
    return {Policy::Starve, seed, max_delay, std::move(links)};
  }
};

/// Throws ValidationError when the schedule is unfair for this graph and f.
void validate_schedule(const DeliverySchedule& s, const CommGraph& g, std::size_t f);

struct AsyncOptions {
  std::size_t max_steps = 0;  // per-agent logical steps before giving up
};

/// Event queue ordered by (delivery time, seeded hash). Stops once every
/// non-faulty state equals the target, then drains in-flight messages.
Execution run_async(const CommGraph& g, AsyncProtocol& protocol, const SetInstance& inst, AgentSet faulty,
                    const AdversaryStrategy& adversary, const DeliverySchedule& schedule, const AsyncOptions& options);

}  // namespace byzset

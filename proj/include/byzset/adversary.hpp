#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "byzset/conditions.hpp"
#include "byzset/message.hpp"
#include "byzset/redundancy.hpp"

namespace byzset {

/// Everything a faulty sender may look at when choosing what to send.
struct SendContext {
  std::size_t round = 0;
  AgentId sender = 0;
  AgentId receiver = 0;
  ValueSet honest_payload;  // what the honest protocol would send here
  const SetInstance* instance = nullptr;
  const CommGraph* graph = nullptr;
  AgentSet faulty;
};

/// A Byzantine behavior. `send` returns nullopt to withhold the message.
/// `relay` handles source-routed copies; when unset, the payload goes
/// through `send` and the routing header is kept.
struct AdversaryStrategy {
  using SendFn = std::function<std::optional<ValueSet>(const SendContext&)>;
  using RelayFn = std::function<std::optional<Message>(const SendContext&, const Message& honest)>;

  std::string name;
  SendFn send;
  RelayFn relay;

  std::optional<ValueSet> on_send(const SendContext& ctx) const { return send(ctx); }
  std::optional<Message> on_relay(const SendContext& ctx, const Message& honest) const;
};

AdversaryStrategy strategy_honest();
AdversaryStrategy strategy_silent();
AdversaryStrategy strategy_constant(ValueSet s);
/// Sends the whole universe of the instance.
AdversaryStrategy strategy_universe();
AdversaryStrategy strategy_include_y(ValueId y);
/// Receivers in L get honest ∪ {y}; receivers in R get the honest payload;
/// anyone else (other faulty agents) is treated like L. Throws
/// ValidationError if L and R overlap.
AdversaryStrategy strategy_split_brain(AgentSet left, AgentSet right, ValueId y);
/// Independent pseudo-random subset per (seed, round, sender, receiver).
AdversaryStrategy strategy_random(std::uint64_t seed);
/// Random payloads, plus relayed copies with tampered payloads and paths.
AdversaryStrategy strategy_forge(std::uint64_t seed);

/// (round, sender, receiver) -> payload; missing entries are withheld.
using ReplayTable = std::map<std::tuple<std::size_t, AgentId, AgentId>, ValueSet>;
AdversaryStrategy strategy_replay(ReplayTable table);

// ---------------------------------------------------------------------------

/// Text form: `adversary <name> [args]`.
///   honest | silent | universe | constant <values or -> | include_y <value>
///   split_brain <value> <L ids or -> <R ids or -> | random <seed> | forge <seed>
/// Id lists are comma-separated, e.g. `split_brain b 0,2 1,3`.
struct AdversarySpec {
  std::string name = "honest";
  std::vector<std::string> args;
  friend bool operator==(const AdversarySpec&, const AdversarySpec&) = default;
};

AdversarySpec parse_adversary_spec(const text::Line& line);
std::string format_adversary_spec(const AdversarySpec& spec);
/// Resolves value tokens against the instance universe; throws ValidationError.
AdversaryStrategy make_strategy(const AdversarySpec& spec, const SetInstance& inst);

/// The fixed sweep catalogue: honest, silent, constant -, universe,
/// include_y, split_brain, random, forge. y is the first value outside the
/// global intersection (first value if none); split_brain tells the holders
/// of y that everyone holds it.
std::vector<AdversarySpec> catalogue_specs(const SetInstance& inst, std::uint64_t seed);

// ---------------------------------------------------------------------------

/// Two executions that a victim agent cannot tell apart. Universe {c, y}.
/// Scenario a: `left` holds {c, y}, everyone else {c}; faulty_a runs
/// split_brain(left, right, y). Scenario b: everyone holds {c, y}; faulty_b =
/// in-neighbors of the victim inside `right`, replaying their scenario-a sends.
struct NecessityScenario {
  AgentSet left;
  AgentSet right;
  AgentSet faulty_a;
  AgentSet faulty_b;
  AgentId victim = 0;
  ValueId y = 1;
  SetInstance instance_a;
  SetInstance instance_b;
};

/// From a violated partition clause. The partition is first reshaped so
/// |F| = f where possible while L stays nonempty and |R| >= f + 1.
NecessityScenario necessity_from_partition(const CommGraph& g, std::size_t f, const PartitionWitness& w);
/// From a source component C of a reduced graph for F.
NecessityScenario necessity_from_source(const CommGraph& g, std::size_t f, AgentSet faulty, AgentSet component);

}  // namespace byzset

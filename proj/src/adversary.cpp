#include "byzset/adversary.hpp"

#include <algorithm>

#include "byzset/error.hpp"
#include "byzset/random.hpp"

namespace byzset {

std::optional<Message> AdversaryStrategy::on_relay(const SendContext& ctx, const Message& honest) const {
  if (relay) return relay(ctx, honest);
  SendContext inner = ctx;
  inner.honest_payload = honest.payload;
  auto payload = send(inner);
  if (!payload) return std::nullopt;
  Message out = honest;
  out.payload = *payload;
  return out;
}

AdversaryStrategy strategy_honest() {
  return {"honest", [](const SendContext& ctx) { return std::optional<ValueSet>(ctx.honest_payload); }, {}};
}

AdversaryStrategy strategy_silent() {
  return {"silent", [](const SendContext&) { return std::optional<ValueSet>(); }, {}};
}

AdversaryStrategy strategy_constant(ValueSet s) {
  return {"constant", [s](const SendContext&) { return std::optional<ValueSet>(s); }, {}};
}

AdversaryStrategy strategy_universe() {
  return {"universe", [](const SendContext& ctx) { return std::optional<ValueSet>(ctx.instance->universe.all()); },
          {}};
}

AdversaryStrategy strategy_include_y(ValueId y) {
  return {"include_y",
          [y](const SendContext& ctx) {
            ValueSet out = ctx.honest_payload;
            out.insert(y);
            return std::optional<ValueSet>(out);
          },
          {}};
}

AdversaryStrategy strategy_split_brain(AgentSet left, AgentSet right, ValueId y) {
  if (left.intersects(right)) throw ValidationError("split_brain sides overlap");
  return {"split_brain",
          [left, right, y](const SendContext& ctx) {
            ValueSet out = ctx.honest_payload;
            if (!right.contains(ctx.receiver)) out.insert(y);
            return std::optional<ValueSet>(out);
          },
          {}};
}

namespace {

ValueSet random_payload(const SendContext& ctx, std::uint64_t seed, std::uint64_t salt) {
  auto bits = hash_words({seed, ctx.round, ctx.sender, ctx.receiver, salt});
  return ValueSet(bits) & ctx.instance->universe.all();
}

std::uint64_t header_salt(const Message& m) {
  std::uint64_t h = 0;
  if (m.relay) {
    h = hash_words({m.relay->origin, m.relay->destination});
    for (auto v : m.relay->path) h = mix64(h ^ v);
  }
  return h;
}

}  // namespace

AdversaryStrategy strategy_random(std::uint64_t seed) {
  return {"random",
          [seed](const SendContext& ctx) { return std::optional<ValueSet>(random_payload(ctx, seed, 0)); },
          [seed](const SendContext& ctx, const Message& honest) {
            Message out = honest;
            out.payload = random_payload(ctx, seed, header_salt(honest));
            return std::optional<Message>(out);
          }};
}

AdversaryStrategy strategy_forge(std::uint64_t seed) {
  return {"forge",
          [seed](const SendContext& ctx) { return std::optional<ValueSet>(random_payload(ctx, seed, 1)); },
          [seed](const SendContext& ctx, const Message& honest) -> std::optional<Message> {
            const std::uint64_t salt = header_salt(honest);
            Message out = honest;
            out.payload = random_payload(ctx, seed, salt ^ 0x5bd1e995ULL);
            if (!out.relay) return out;
            auto& path = out.relay->path;
            switch (hash_words({seed, ctx.round, ctx.sender, ctx.receiver, salt}) % 4) {
              case 0:
                break;  // payload only
              case 1:
                // Hide the forger: claim the copy came straight from the previous hop.
                if (path.size() > 1) path.pop_back();
                break;
              case 2: {
                // Claim a short fabricated route origin -> receiver's in-neighbor.
                const auto n = ctx.graph->size();
                AgentId fake = hash_words({seed, salt, 7}) % n;
                path = {out.relay->origin};
                if (fake != out.relay->origin && fake != ctx.receiver) path.push_back(fake);
                break;
              }
              default:
                out.payload = honest.payload;
                out.relay->origin = (out.relay->origin + 1) % ctx.graph->size();
                break;
            }
            return out;
          }};
}

AdversaryStrategy strategy_replay(ReplayTable table) {
  return {"replay",
          [table = std::move(table)](const SendContext& ctx) -> std::optional<ValueSet> {
            auto it = table.find({ctx.round, ctx.sender, ctx.receiver});
            if (it == table.end()) return std::nullopt;
            return it->second;
          },
          {}};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

AgentSet parse_id_list(const std::string& s, std::size_t n) {
  AgentSet out;
  if (s == "-") return out;
  for (const auto& piece : split_commas(s)) {
    std::size_t id = 0;
    try {
      std::size_t used = 0;
      id = std::stoul(piece, &used);
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw ValidationError("bad agent id '" + piece + "' in adversary arguments");
    }
    if (id >= n) throw ValidationError("agent id " + piece + " out of range in adversary arguments");
    out.insert(id);
  }
  return out;
}

ValueId parse_value(const std::string& token, const SetInstance& inst) {
  auto v = inst.universe.find(token);
  if (!v) throw ValidationError("adversary value '" + token + "' not in universe");
  return *v;
}

std::uint64_t parse_seed(const AdversarySpec& spec) {
  if (spec.args.size() != 1) throw ValidationError(spec.name + " takes one seed argument");
  try {
    std::size_t used = 0;
    auto seed = std::stoull(spec.args[0], &used);
    if (used != spec.args[0].size()) throw std::invalid_argument(spec.args[0]);
    return seed;
  } catch (const std::exception&) {
    throw ValidationError("bad seed '" + spec.args[0] + "'");
  }
}

std::string format_ids(AgentSet s) {
  if (s.empty()) return "-";
  std::string out;
  for (auto i : s) out += (out.empty() ? "" : ",") + std::to_string(i);
  return out;
}

}  // namespace

AdversarySpec parse_adversary_spec(const text::Line& line) {
  if (line.tokens.size() < 2) throw ParseError(line.number, "expected 'adversary <name> [args]'");
  AdversarySpec spec{line.tokens[1], {line.tokens.begin() + 2, line.tokens.end()}};
  static const std::vector<std::string> known = {"honest",      "silent",      "universe", "constant",
                                                 "include_y",   "split_brain", "random",   "forge"};
  if (std::find(known.begin(), known.end(), spec.name) == known.end()) {
    throw ParseError(line.number, "unknown adversary '" + spec.name + "'");
  }
  return spec;
}

std::string format_adversary_spec(const AdversarySpec& spec) {
  std::string out = "adversary " + spec.name;
  for (const auto& a : spec.args) out += " " + a;
  return out;
}

AdversaryStrategy make_strategy(const AdversarySpec& spec, const SetInstance& inst) {
  auto arity = [&](std::size_t k) {
    if (spec.args.size() != k) {
      throw ValidationError("adversary " + spec.name + " takes " + std::to_string(k) + " argument(s)");
    }
  };
  if (spec.name == "honest") return arity(0), strategy_honest();
  if (spec.name == "silent") return arity(0), strategy_silent();
  if (spec.name == "universe") return arity(0), strategy_universe();
  if (spec.name == "constant") {
    ValueSet s;
    if (!(spec.args.size() == 1 && spec.args[0] == "-")) {
      for (const auto& t : spec.args) s.insert(parse_value(t, inst));
    }
    return strategy_constant(s);
  }
  if (spec.name == "include_y") return arity(1), strategy_include_y(parse_value(spec.args[0], inst));
  if (spec.name == "split_brain") {
    arity(3);
    return strategy_split_brain(parse_id_list(spec.args[1], inst.size()), parse_id_list(spec.args[2], inst.size()),
                                parse_value(spec.args[0], inst));
  }
  if (spec.name == "random") return strategy_random(parse_seed(spec));
  if (spec.name == "forge") return strategy_forge(parse_seed(spec));
  throw ValidationError("unknown adversary '" + spec.name + "'");
}

std::vector<AdversarySpec> catalogue_specs(const SetInstance& inst, std::uint64_t seed) {
  const ValueSet global = intersect_or_universe(inst, inst.agents());
  const ValueSet outside = inst.universe.all() - global;
  const ValueId y = outside.empty() ? 0 : outside.front();
  AgentSet holders;
  for (std::size_t i = 0; i < inst.size(); ++i)
    if (inst.locals[i].contains(y)) holders.insert(i);
  const std::string token = inst.universe.token(y);
  return {
      {"honest", {}},
      {"silent", {}},
      {"constant", {"-"}},
      {"universe", {}},
      {"include_y", {token}},
      {"split_brain", {token, format_ids(holders), format_ids(inst.agents() - holders)}},
      {"random", {std::to_string(seed)}},
      {"forge", {std::to_string(seed)}},
  };
}

// ---------------------------------------------------------------------------

namespace {

NecessityScenario build_scenario(const CommGraph& g, std::size_t f, AgentSet left, AgentSet right, AgentSet faulty) {
  if (left.empty() || right.empty()) throw ValidationError("necessity construction needs nonempty L and R");
  NecessityScenario s;
  s.left = left;
  s.right = right;
  s.faulty_a = faulty;
  s.victim = left.front();
  s.faulty_b = g.in_neighbors(s.victim) & right;
  if (s.faulty_b.size() > f) throw ValidationError("victim has more than f in-neighbors in R");
  const Universe universe(std::vector<std::string>{"c", "y"});
  const ValueSet c{0};
  const ValueSet cy{0, 1};
  s.instance_a = SetInstance{universe, std::vector<ValueSet>(g.size(), c), f};
  for (auto i : left) s.instance_a.locals[i] = cy;
  s.instance_b = SetInstance{universe, std::vector<ValueSet>(g.size(), cy), f};
  return s;
}

}  // namespace

NecessityScenario necessity_from_partition(const CommGraph& g, std::size_t f, const PartitionWitness& w) {
  AgentSet left = w.left_clause ? w.partition.left : w.partition.right;
  AgentSet right = w.left_clause ? w.partition.right : w.partition.left;
  AgentSet faulty = w.partition.faulty;
  // Reshape so that |F| = f: take highest-index nodes from R down to f + 1,
  // then from L down to one node.
  auto shift = [&](AgentSet& from, std::size_t keep) {
    while (faulty.size() < f && from.size() > keep) {
      auto members = from.to_vector();
      from.erase(members.back());
      faulty.insert(members.back());
    }
  };
  shift(right, f + 1);
  shift(left, 1);
  return build_scenario(g, f, left, right, faulty);
}

NecessityScenario necessity_from_source(const CommGraph& g, std::size_t f, AgentSet faulty, AgentSet component) {
  return build_scenario(g, f, component, g.agents() - faulty - component, faulty);
}

}  // namespace byzset

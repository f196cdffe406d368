#include "byzset/adversary.hpp"
#include "byzset/error.hpp"
#include "byzset/protocols.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace byzset;

namespace {

constexpr ValueId a = 0, b = 1;

SetInstance two_value(std::vector<ValueSet> locals, std::size_t f = 1) {
  return SetInstance{Universe::of_size(2), std::move(locals), f};
}

SendContext ctx_for(const SetInstance& inst, const CommGraph& g, AgentId sender, AgentId receiver,
                    std::size_t round = 1) {
  return {round, sender, receiver, inst.locals[sender], &inst, &g, AgentSet{sender}};
}

text::Line line(std::vector<std::string> tokens) { return {7, std::move(tokens)}; }

}  // namespace

TEST_CASE("constant, universe and honest") {
  auto g = CommGraph::complete(3);
  auto inst = two_value({{a}, {a, b}, {b}});
  auto ctx = ctx_for(inst, g, 1, 0);
  CHECK(strategy_constant({a, b}).on_send(ctx) == ValueSet{a, b});
  CHECK(strategy_constant({}).on_send(ctx) == ValueSet{});
  CHECK(strategy_constant(inst.locals[1]).on_send(ctx) == strategy_honest().on_send(ctx));
  CHECK(strategy_universe().on_send(ctx) == inst.universe.all());
  CHECK_FALSE(strategy_silent().on_send(ctx).has_value());
}

TEST_CASE("include_y") {
  auto g = CommGraph::complete(3);
  auto inst = two_value({{a}, {a, b}, {b}});
  CHECK(strategy_include_y(b).on_send(ctx_for(inst, g, 0, 1)) == ValueSet{a, b});
  CHECK(strategy_include_y(b).on_send(ctx_for(inst, g, 1, 0)) == ValueSet{a, b});
}

TEST_CASE("split_brain") {
  auto g = CommGraph::complete(4);
  auto inst = two_value({{a}, {a}, {a}, {a}});
  auto s = strategy_split_brain({0}, {1, 2}, b);
  CHECK(s.on_send(ctx_for(inst, g, 3, 0)) == ValueSet{a, b});
  CHECK(s.on_send(ctx_for(inst, g, 3, 1)) == ValueSet{a});
  CHECK(s.on_send(ctx_for(inst, g, 3, 2)) == ValueSet{a});
  CHECK_THROWS_AS(strategy_split_brain({0, 1}, {1}, b), ValidationError);
}

TEST_CASE("random is a pure function of its inputs") {
  auto g = CommGraph::complete(5);
  SetInstance inst{Universe::of_size(6), std::vector<ValueSet>(5, ValueSet{0}), 1};
  auto s1 = strategy_random(42);
  auto s2 = strategy_random(42);
  bool equivocates = false;
  for (std::size_t round = 1; round <= 5; ++round) {
    for (AgentId r = 0; r < 4; ++r) {
      auto x = s1.on_send(ctx_for(inst, g, 4, r, round));
      CHECK(x == s2.on_send(ctx_for(inst, g, 4, r, round)));
      CHECK(x->subset_of(inst.universe.all()));
      if (x != s1.on_send(ctx_for(inst, g, 4, (r + 1) % 4, round))) equivocates = true;
    }
  }
  CHECK(equivocates);
}

TEST_CASE("forge tampers with relayed copies deterministically") {
  auto g = CommGraph::complete(5);
  SetInstance inst{Universe::of_size(4), std::vector<ValueSet>(5, ValueSet{0, 1}), 1};
  Message honest{2, 3, ValueSet{0, 1}, RelayHeader{0, 4, {0, 1, 2}}};
  auto forge = strategy_forge(9);
  std::size_t path_changes = 0, payload_changes = 0, origin_changes = 0;
  for (std::size_t round = 1; round <= 40; ++round) {
    auto ctx = ctx_for(inst, g, 2, 3, round);
    auto m = forge.on_relay(ctx, honest);
    REQUIRE(m);
    CHECK(*m == *strategy_forge(9).on_relay(ctx, honest));
    if (m->relay->path != honest.relay->path) ++path_changes;
    if (m->payload != honest.payload) ++payload_changes;
    if (m->relay->origin != honest.relay->origin) ++origin_changes;
  }
  CHECK(path_changes > 0);
  CHECK(payload_changes > 0);
  CHECK(origin_changes > 0);

  // Without a relay hook the payload goes through `send` and the header stays.
  auto m = strategy_constant({}).on_relay(ctx_for(inst, g, 2, 3), honest);
  CHECK(m->relay == honest.relay);
  CHECK(m->payload.empty());
  CHECK_FALSE(strategy_silent().on_relay(ctx_for(inst, g, 2, 3), honest));
}

TEST_CASE("replay table") {
  auto g = CommGraph::complete(3);
  auto inst = two_value({{a}, {a}, {a}});
  auto s = strategy_replay({{{1, 2, 0}, ValueSet{b}}});
  CHECK(s.on_send(ctx_for(inst, g, 2, 0, 1)) == ValueSet{b});
  CHECK_FALSE(s.on_send(ctx_for(inst, g, 2, 0, 2)));
}

TEST_CASE("adversary specs") {
  auto inst = two_value({{a}, {a, b}, {a}, {a}});
  auto spec = parse_adversary_spec(line({"adversary", "split_brain", "b", "1", "0,2,3"}));
  CHECK(format_adversary_spec(spec) == "adversary split_brain b 1 0,2,3");
  auto g = CommGraph::complete(4);
  auto s = make_strategy(spec, inst);
  CHECK(s.on_send(ctx_for(inst, g, 3, 1)) == ValueSet{a, b});
  CHECK(s.on_send(ctx_for(inst, g, 3, 0)) == ValueSet{a});

  CHECK(make_strategy(parse_adversary_spec(line({"adversary", "constant", "-"})), inst).on_send(
            ctx_for(inst, g, 3, 0)) == ValueSet{});
  CHECK(make_strategy(parse_adversary_spec(line({"adversary", "constant", "a", "b"})), inst).on_send(
            ctx_for(inst, g, 3, 0)) == ValueSet{a, b});

  try {
    parse_adversary_spec(line({"adversary", "gremlin"}));
    FAIL("unknown adversary accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
  }
  CHECK_THROWS_AS(parse_adversary_spec(line({"adversary"})), ParseError);
  CHECK_THROWS_AS(make_strategy({"include_y", {"z"}}, inst), ValidationError);
  CHECK_THROWS_AS(make_strategy({"split_brain", {"b", "0", "9"}}, inst), ValidationError);
  CHECK_THROWS_AS(make_strategy({"split_brain", {"b", "0", "0"}}, inst), ValidationError);
  CHECK_THROWS_AS(make_strategy({"random", {"x1"}}, inst), ValidationError);
  CHECK_THROWS_AS(make_strategy({"silent", {"1"}}, inst), ValidationError);
}

TEST_CASE("catalogue") {
  auto inst = two_value({{a}, {a, b}, {a}, {a}});
  auto specs = catalogue_specs(inst, 5);
  std::vector<std::string> names;
  for (const auto& s : specs) names.push_back(s.name);
  CHECK(names == std::vector<std::string>{"honest", "silent", "constant", "universe", "include_y", "split_brain",
                                          "random", "forge"});
  CHECK(specs[4].args == std::vector<std::string>{"b"});
  CHECK(specs[5].args == std::vector<std::string>{"b", "1", "0,2,3"});
  for (const auto& s : specs) CHECK_NOTHROW(make_strategy(s, inst));
}

TEST_CASE("necessity construction from a partition witness") {
  // The directed 4-cycle violates Condition A at f = 1.
  auto ring = CommGraph::cycle(4);
  auto verdict = check_condition_a(ring, 1);
  REQUIRE_FALSE(verdict.holds);
  auto w = std::get<PartitionWitness>(verdict.witness);
  auto s = necessity_from_partition(ring, 1, w);
  CHECK(s.faulty_a.size() == 1);
  CHECK_FALSE(s.left.empty());
  CHECK(s.right.size() >= 2);
  CHECK((s.left | s.right | s.faulty_a) == ring.agents());
  CHECK(s.left.contains(s.victim));
  CHECK(s.faulty_b == (ring.in_neighbors(s.victim) & s.right));
  for (auto i : s.left) CHECK((ring.in_neighbors(i) & s.right).size() <= 1);
  CHECK(s.instance_a.locals[s.victim] == ValueSet{0, 1});
  for (auto i : s.right) CHECK(s.instance_a.locals[i] == ValueSet{0});
  for (auto i : ring.agents()) CHECK(s.instance_b.locals[i] == ValueSet{0, 1});

  // Both sides must be nonempty.
  PartitionWitness empty{{AgentSet{}, AgentSet{0, 1, 2}, AgentSet{3}}, 2, true};
  CHECK_THROWS_AS(necessity_from_partition(ring, 1, empty), ValidationError);
}

TEST_CASE("split-brain pair is indistinguishable at the victim") {
  auto ring = CommGraph::cycle(4);
  auto s = necessity_from_partition(ring, 1, std::get<PartitionWitness>(check_condition_a(ring, 1).witness));
  auto demo = demonstrate_necessity(ring, s);
  CHECK(demo.victim_indistinguishable);
  CHECK(demo.correct_a != demo.correct_b);
  CHECK(demo.distinguishing_agent.has_value());
  // Same inputs, same transcript.
  CHECK(demonstrate_necessity(ring, s).a.transcript == demo.a.transcript);
}

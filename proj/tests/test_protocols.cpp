#include "byzset/error.hpp"
#include "byzset/protocols.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace byzset;
using byzset::testing::random_graph;

namespace {

constexpr ValueId a = 0, b = 1;

SetInstance two_value(std::vector<ValueSet> locals, std::size_t f = 1) {
  return SetInstance{Universe::of_size(2), std::move(locals), f};
}

std::vector<AdversaryStrategy> catalogue(const SetInstance& inst, std::uint64_t seed) {
  std::vector<AdversaryStrategy> out;
  for (const auto& spec : catalogue_specs(inst, seed)) out.push_back(make_strategy(spec, inst));
  return out;
}

// Property-C instances paired with graphs that satisfy Condition A.
struct Certified {
  CommGraph g;
  SetInstance inst;
};

std::vector<Certified> certified_pairs(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Certified> out;
  while (out.size() < count) {
    const std::size_t n = 4 + rng.below(3);
    auto g = random_graph(n, rng, 4, 5);
    if (!check_condition_a(g, 1).holds) continue;
    auto inst = generate_instance(3, n, 1, InstanceTarget::satisfy_c(), rng.next());
    REQUIRE(check_property_c(inst).holds);
    out.push_back({g, inst});
  }
  return out;
}

// Non-faulty states never grow and never lose a value of the target.
void check_validity_and_safety(const Execution& run, const SetInstance& inst, AgentSet faulty) {
  std::vector<ValueSet> last = inst.locals;
  for (const auto& e : run.transcript.events) {
    if (e.kind != EventKind::StateChange || faulty.contains(e.sender)) continue;
    CHECK(e.payload.subset_of(last[e.sender]));
    CHECK(run.outcome.target.subset_of(e.payload));
    last[e.sender] = e.payload;
  }
}

// K_{3,3} with both directions on every edge: 3-connected, six non-adjacent pairs per side.
CommGraph bipartite33() {
  std::vector<Edge> edges;
  for (AgentId i = 0; i < 3; ++i)
    for (AgentId j = 3; j < 6; ++j) {
      edges.push_back({i, j});
      edges.push_back({j, i});
    }
  return CommGraph(6, edges);
}

}  // namespace

// ---------------------------------------------------------------------------

TEST_CASE("centralized examples") {
  auto all_a = two_value({{a}, {a}, {a}, {a}});
  CHECK(run_centralized(all_a, all_a.locals).value == ValueSet{a});

  auto inst = two_value({{a}, {a}, {a}, {a}});
  auto reported = inst.locals;
  reported[3] = {a, b};
  auto r = run_centralized(inst, reported);
  CHECK(r.value == ValueSet{a});
  CHECK(qualifying_quorums(inst, reported).front() == AgentSet{0, 1, 2});

  CHECK_THROWS_AS(run_centralized(inst, {{a}}), ValidationError);
}

TEST_CASE("centralized: exhaustive faulty reports over a two-value universe") {
  // Every 4-agent instance over {a, b} with Property C, every single faulty
  // agent, every possible report.
  std::size_t instances = 0;
  for (std::uint64_t code = 0; code < 256; ++code) {
    std::vector<ValueSet> locals;
    for (int i = 0; i < 4; ++i) locals.push_back(ValueSet((code >> (2 * i)) & 3U));
    auto inst = two_value(locals);
    if (!check_property_c(inst).holds) continue;
    ++instances;
    for (AgentId bad = 0; bad < 4; ++bad) {
      const ValueSet expected = intersect(inst, inst.agents() - AgentSet{bad});
      for (std::uint64_t lie = 0; lie < 4; ++lie) {
        auto reported = inst.locals;
        reported[bad] = ValueSet(lie);
        auto quorums = qualifying_quorums(inst, reported);
        REQUIRE_FALSE(quorums.empty());
        // Whichever T qualifies, the answer is the same.
        SetInstance view{inst.universe, reported, 1};
        for (auto t : quorums) CHECK(intersect(view, t) == expected);
        CHECK(run_centralized(inst, reported).value == expected);
      }
    }
  }
  CHECK(instances > 10);
}

TEST_CASE("constrained_update") {
  CHECK(constrained_update({0, 1}, {{1, {0}}, {2, {0}}, {4, {0, 1}}}, 2) == ValueSet{0});
  CHECK(constrained_update({a}, {{1, {a}}, {2, {a}}}, 1) == ValueSet{a});
  CHECK(constrained_update({}, {{1, {}}, {2, {a}}}, 1) == ValueSet{});
  CHECK(constrained_update({a, b}, {{1, {a}}}, 2) == ValueSet{a, b});
}

TEST_CASE("constrained: K5 walkthrough and trivial runs") {
  auto g = CommGraph::complete(5);
  auto inst = two_value({{0}, {0}, {0, 1}, {0, 1}, {0}});
  auto run = run_constrained(g, inst, {4}, strategy_constant({0, 1}));
  CHECK(run.outcome.converged);
  CHECK(run.outcome.rounds_elapsed == 1);
  for (AgentId i = 0; i < 4; ++i) CHECK(run.outcome.decided[i] == ValueSet{0});
  CHECK_FALSE(run.outcome.decided[4].has_value());

  auto same = two_value({{a, b}, {a, b}, {a, b}});
  auto trivial = run_constrained(CommGraph::cycle(3), same, {}, strategy_honest());
  CHECK(trivial.outcome.converged);
  CHECK(trivial.outcome.rounds_elapsed == 0);

  CHECK_THROWS_AS(run_constrained(g, inst, {3, 4}, strategy_honest()), ValidationError);
}

TEST_CASE("constrained: the 4-cycle can be attacked") {
  auto ring = CommGraph::cycle(4);
  bool failure = false;
  auto s = necessity_from_partition(ring, 1, std::get<PartitionWitness>(check_condition_a(ring, 1).witness));
  for (auto faulty : fault_placements(4, 1)) {
    for (const auto& adv : catalogue(s.instance_a, 1)) {
      auto run = run_constrained(ring, s.instance_a, faulty, adv);
      if (!run.outcome.converged) failure = true;
    }
  }
  auto attacked = run_constrained(ring, s.instance_a, s.faulty_a, strategy_split_brain(s.left, s.right, s.y));
  CHECK_FALSE(attacked.outcome.converged);
  CHECK(failure);
}

TEST_CASE("constrained: validity, safety, round bound, adversary independence") {
  for (const auto& [g, inst] : certified_pairs(40, 3)) {
    const std::size_t n = g.size();
    for (auto faulty : fault_placements(n, 1)) {
      std::optional<std::vector<std::optional<ValueSet>>> first;
      for (const auto& adv : catalogue(inst, n)) {
        auto run = run_constrained(g, inst, faulty, adv);
        CHECK(run.outcome.converged);
        CHECK(run.outcome.rounds_elapsed <= n - 2);
        check_validity_and_safety(run, inst, faulty);
        if (!first) first = run.outcome.decided;
        CHECK(run.outcome.decided == *first);
      }
    }
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("routes") {
  CHECK_THROWS_AS(build_routes(CommGraph::cycle(4), 1), ValidationError);
  auto routes = build_routes(bipartite33(), 1);
  CHECK(routes.at({0, 3}) == std::vector<std::vector<AgentId>>{{0, 3}});
  const auto& via = routes.at({0, 1});
  CHECK(via.size() == 3);
  CHECK(valid_disjoint_paths(bipartite33(), {0, 1, via}));
}

TEST_CASE("resolve_copies and absence_filter") {
  std::vector<std::vector<AgentId>> routes{{0, 3, 1}, {0, 4, 1}, {0, 5, 1}};
  CHECK(resolve_copies({{{0, 3, 1}, {a}}, {{0, 4, 1}, {a}}, {{0, 5, 1}, {b}}}, routes, 1) == ValueSet{a});
  // The same route twice counts once; unknown routes are ignored.
  CHECK(resolve_copies({{{0, 3, 1}, {a}}, {{0, 3, 1}, {a}}, {{0, 2, 1}, {a}}}, routes, 1) == ValueSet{});
  CHECK(resolve_copies({}, routes, 1) == ValueSet{});

  CHECK(absence_filter({a, b}, {{a, b}, {a}, {a, b}, {a, b}}, 0, 1) == ValueSet{a, b});
  CHECK(absence_filter({a, b}, {{a, b}, {a}, {a}, {a, b}}, 0, 1) == ValueSet{a});
  // Its own set is not counted.
  CHECK(absence_filter({a, b}, {{a}, {a}, {a, b}, {a, b}}, 0, 1) == ValueSet{a, b});
}

TEST_CASE("absence filter alone: exact non-faulty sets give the non-faulty intersection") {
  Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 4 + rng.below(4);
    const std::size_t f = 1 + rng.below((n - 2) / 2);
    auto inst = generate_instance(5, n, f, InstanceTarget::satisfy_c(), trial);
    auto faulty = rng.subset_of_size(inst.agents(), rng.below(f + 1));
    std::vector<ValueSet> z = inst.locals;
    for (auto k : faulty) z[k] = rng.subset(inst.universe.all());
    const ValueSet target = intersect(inst, inst.agents() - faulty);
    for (auto i : inst.agents() - faulty) CHECK(absence_filter(inst.locals[i], z, i, f) == target);
  }
}

TEST_CASE("unconstrained: relay integrity and correctness") {
  Rng rng(23);
  std::vector<CommGraph> graphs{CommGraph::complete(4), bipartite33()};
  while (graphs.size() < 12) {
    const std::size_t n = 5 + rng.below(2);
    auto g = random_graph(n, rng, 3, 4);
    if (check_connectivity(g, 3).holds) graphs.push_back(g);
  }
  std::size_t relayed = 0;
  for (const auto& g : graphs) {
    const std::size_t n = g.size();
    auto inst = generate_instance(3, n, 1, InstanceTarget::satisfy_c(), rng.next());
    for (auto faulty : fault_placements(n, 1)) {
      for (const auto& adv : catalogue(inst, n + faulty.bits())) {
        auto run = run_unconstrained(g, inst, faulty, adv);
        CHECK(run.execution.outcome.converged);
        for (auto i : g.agents() - faulty)
          for (auto j : g.agents() - faulty) CHECK(run.stored[i][j] == inst.locals[j]);
        // Faulty direct senders that stay silent read as the universe.
        if (adv.name == "silent") {
          for (auto k : faulty)
            for (auto i : g.out_neighbors(k) - faulty) CHECK(run.stored[i][k] == inst.universe.all());
        }
        for (const auto& e : run.execution.transcript.events) {
          if (e.kind == EventKind::Deliver && e.relay && e.relay->destination != e.receiver) ++relayed;
        }
      }
    }
  }
  CHECK(relayed > 0);
}

TEST_CASE("unconstrained: trivial fault-free run") {
  auto g = bipartite33();
  auto inst = generate_instance(4, 6, 1, InstanceTarget::satisfy_c(), 2);
  auto run = run_unconstrained(g, inst, {}, strategy_honest());
  CHECK(run.execution.outcome.converged);
  CHECK(run.execution.outcome.target == intersect(inst, inst.agents()));
  CHECK(run.execution.outcome.rounds_elapsed == 2);
}

// ---------------------------------------------------------------------------

TEST_CASE("async: seeded schedules on K6") {
  auto g = CommGraph::complete(6);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto inst = generate_instance(4, 6, 1, InstanceTarget::satisfy_3f(), seed);
    REQUIRE(check_3f_redundancy(inst).holds);
    const AgentSet faulty{seed % 6};
    auto run = run_constrained_async(g, inst, faulty, strategy_random(seed), DeliverySchedule::random_delay(5, seed));
    CHECK(run.outcome.converged);
    check_validity_and_safety(run, inst, faulty);
  }
}

TEST_CASE("async: starving f links") {
  auto g = CommGraph::complete(6);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto inst = generate_instance(4, 6, 1, InstanceTarget::satisfy_3f(), seed);
    const AgentId victim = seed % 5;
    const AgentId starved = (victim + 1) % 5;
    auto run = run_constrained_async(g, inst, {5}, strategy_universe(),
                                     DeliverySchedule::starve(3, {{starved, victim}}, seed));
    CHECK(run.outcome.converged);
  }
}

TEST_CASE("async: a 2f+1 removal threshold starves") {
  // Agent 0 alone holds b. With the link 1 -> 0 starved and agent 4 claiming
  // b, agent 0 sees b missing from only two sets per step.
  auto g = CommGraph::complete(5);
  auto inst = two_value({{a, b}, {a}, {a}, {a}, {a}});
  REQUIRE(check_3f_redundancy(inst).holds);
  REQUIRE(check_condition_async(g, 1).holds);
  auto schedule = DeliverySchedule::starve(2, {{1, 0}}, 7);
  auto strict = run_constrained_async(g, inst, {4}, strategy_universe(), schedule, {3, 20});
  CHECK_FALSE(strict.outcome.converged);
  CHECK(strict.outcome.decided[0] == ValueSet{a, b});
  auto relaxed = run_constrained_async(g, inst, {4}, strategy_universe(), schedule);
  CHECK(relaxed.outcome.converged);
}

// ---------------------------------------------------------------------------

TEST_CASE("necessity demonstrations") {
  Rng rng(31);
  std::size_t from_partitions = 0, from_sources = 0;
  while (from_partitions < 10 || from_sources < 10) {
    const std::size_t n = 4 + rng.below(3);
    auto g = random_graph(n, rng);
    auto a_verdict = check_condition_a(g, 1);
    if (a_verdict.holds) continue;
    std::vector<NecessityScenario> scenarios{
        necessity_from_partition(g, 1, std::get<PartitionWitness>(a_verdict.witness))};
    auto b_verdict = check_condition_b(g, 1);
    REQUIRE_FALSE(b_verdict.holds);
    auto w = std::get<SourceWitness>(b_verdict.witness);
    scenarios.push_back(necessity_from_source(g, 1, w.reduced.faulty(), w.component));
    for (std::size_t k = 0; k < scenarios.size(); ++k) {
      auto demo = demonstrate_necessity(g, scenarios[k]);
      CHECK(demo.victim_indistinguishable);
      CHECK(demo.correct_a != demo.correct_b);
      // The victim's output is the same in both, so it is wrong in one.
      CHECK(demo.a.outcome.decided[demo.scenario.victim] == demo.b.outcome.decided[demo.scenario.victim]);
      CHECK(demo.distinguishing_agent.has_value());
      ++(k == 0 ? from_partitions : from_sources);
    }
  }
}

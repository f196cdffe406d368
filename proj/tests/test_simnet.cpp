#include <fstream>
#include <sstream>

#include "byzset/error.hpp"
#include "byzset/protocols.hpp"
#include "byzset/simnet.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace byzset;
using byzset::testing::random_graph;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SetInstance k5_golden() {
  return SetInstance{Universe::of_size(2), {{0}, {0}, {0, 1}, {0, 1}, {0}}, 1};
}

// Sends to a non-neighbor in round 1.
class StrayProtocol : public SyncProtocol {
 public:
  void start(const CommGraph&, const SetInstance&, AgentSet) override {}
  std::vector<Message> emit(std::size_t, AgentId i) override {
    if (i == 0) return {{0, 2, ValueSet{}, std::nullopt}};
    return {};
  }
  void receive(std::size_t, AgentId, std::span<const Message>) override {}
  ValueSet state(AgentId) const override { return {}; }
  std::optional<ValueSet> output(AgentId) const override { return ValueSet{}; }
  bool done(std::size_t) const override { return false; }
};

std::size_t count(const Transcript& t, EventKind kind) {
  return static_cast<std::size_t>(
      std::count_if(t.events.begin(), t.events.end(), [&](const Event& e) { return e.kind == kind; }));
}

}  // namespace

TEST_CASE("sync determinism on an honest K4 run") {
  auto g = CommGraph::complete(4);
  SetInstance inst{Universe::of_size(3), {{0, 1}, {0, 2}, {0}, {0, 1, 2}}, 1};
  auto r1 = run_constrained(g, inst, {}, strategy_honest());
  auto r2 = run_constrained(g, inst, {}, strategy_honest());
  CHECK(r1.transcript == r2.transcript);
  CHECK(dump_transcript(r1.transcript, inst.universe) == dump_transcript(r2.transcript, inst.universe));
  CHECK(transcript_digest(r1.transcript, inst.universe) == transcript_digest(r2.transcript, inst.universe));
  CHECK(r1.outcome.converged);
}

TEST_CASE("K5 walkthrough matches the hand-traced transcript") {
  auto g = CommGraph::complete(5);
  auto inst = k5_golden();
  auto run = run_constrained(g, inst, {4}, strategy_constant({0, 1}));
  CHECK(dump_transcript(run.transcript, inst.universe) ==
        read_file(std::string(BYZSET_FIXTURES) + "/k5_golden.transcript"));
  CHECK(run.outcome.converged);
  CHECK(run.outcome.rounds_elapsed == 1);
  // include_y produces the same trace: the faulty agent's true set is {a}.
  auto again = run_constrained(g, inst, {4}, strategy_include_y(1));
  CHECK(again.transcript == run.transcript);
}

TEST_CASE("zero-round decision") {
  auto g = CommGraph::complete(4);
  SetInstance inst{Universe::of_size(2), std::vector<ValueSet>(4, ValueSet{1}), 1};
  auto run = run_constrained(g, inst, {}, strategy_honest());
  CHECK(run.outcome.rounds_elapsed == 0);
  CHECK(run.outcome.converged);
  for (const auto& e : run.transcript.events) CHECK(e.step == 0);
  CHECK(count(run.transcript, EventKind::Send) == 0);
  CHECK(count(run.transcript, EventKind::Decide) == 4);
}

TEST_CASE("engine input validation") {
  auto g = CommGraph::cycle(3);
  SetInstance inst{Universe::of_size(1), std::vector<ValueSet>(3, ValueSet{0}), 1};
  StrayProtocol stray;
  CHECK_THROWS_AS(run_sync(g, stray, inst, {}, strategy_honest(), {2, true}), std::logic_error);
  CHECK_THROWS_AS(run_constrained(g, inst, {0, 1}, strategy_honest()), ValidationError);
  CHECK_THROWS_AS(run_constrained(CommGraph::cycle(4), inst, {}, strategy_honest()), ValidationError);
}

TEST_CASE("view_of") {
  // Agent 0 has no in-edges.
  auto g = build_graph(3, {{0, 1}, {1, 2}, {2, 1}});
  SetInstance inst{Universe::of_size(2), {{0}, {0, 1}, {0}}, 0};
  auto run = run_constrained(g, inst, {}, strategy_honest(), {3, 0, false});
  for (const auto& e : view_of(run.transcript, 0)) {
    CHECK(e.sender == 0);
    CHECK(e.receiver == 0);
    CHECK(e.kind != EventKind::Deliver);
  }
  CHECK(indistinguishable(run.transcript, run.transcript, 1));
}

TEST_CASE("synchronous completeness") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng.below(4);
    auto g = random_graph(n, rng);
    auto inst = generate_instance(3, n, 1, InstanceTarget::satisfy_c(), trial);
    const AgentSet faulty = AgentSet::single(rng.below(n));
    const std::size_t rounds = 3;
    auto run = run_constrained(g, inst, faulty, strategy_silent(), {rounds, 0, false});
    for (std::size_t t = 1; t <= rounds; ++t) {
      for (const auto& e : g.edges()) {
        auto hits = std::count_if(run.transcript.events.begin(), run.transcript.events.end(), [&](const Event& ev) {
          return ev.kind == EventKind::Deliver && ev.step == t && ev.sender == e.from && ev.receiver == e.to;
        });
        CHECK(hits == (faulty.contains(e.from) ? 0 : 1));
      }
    }
    // Each honest view holds one delivery per honest in-neighbor per round.
    for (auto i : g.agents() - faulty) {
      auto view = view_of(run.transcript, i);
      auto delivered = std::count_if(view.begin(), view.end(), [](const Event& e) { return e.kind == EventKind::Deliver; });
      CHECK(static_cast<std::size_t>(delivered) == rounds * (g.in_neighbors(i) - faulty).size());
    }
  }
}

TEST_CASE("dump format") {
  Transcript t;
  t.events.push_back({3, EventKind::Deliver, 1, 2, ValueSet{0, 2}, RelayHeader{0, 2, {0, 1}}, std::nullopt});
  t.events.push_back({4, EventKind::Send, 2, 0, ValueSet{}, std::nullopt, 5});
  CHECK(dump_transcript(t, Universe::of_size(3)) == "3 deliver 1 2 a c @ 0 2 0 1\n4 send 2 0 - t=5\n");
}

// ---------------------------------------------------------------------------

TEST_CASE("schedule validation") {
  auto g = CommGraph::complete(5);
  CHECK_NOTHROW(validate_schedule(DeliverySchedule::starve(3, {{1, 0}}, 1), g, 1));
  CHECK_THROWS_AS(validate_schedule(DeliverySchedule::starve(3, {{1, 0}, {2, 0}}, 1), g, 1), ValidationError);
  CHECK_THROWS_AS(validate_schedule(DeliverySchedule::starve(3, {{0, 0}}, 1), g, 1), ValidationError);
  CHECK_THROWS_AS(validate_schedule(DeliverySchedule::random_delay(0, 1), g, 1), ValidationError);
  auto ring = CommGraph::cycle(4);
  CHECK_THROWS_AS(validate_schedule(DeliverySchedule::starve(2, {{1, 0}}, 1), ring, 1), ValidationError);
  SetInstance inst{Universe::of_size(1), std::vector<ValueSet>(5, ValueSet{0}), 1};
  CHECK_THROWS_AS(run_constrained_async(g, inst, {}, strategy_honest(), DeliverySchedule::starve(3, {{1, 0}, {2, 0}}, 1)),
                  ValidationError);
}

TEST_CASE("synchronous schedule embeds the lock-step run") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 4 + rng.below(3);
    auto g = random_graph(n, rng, 2, 3);
    auto inst = generate_instance(3, n, 1, InstanceTarget::satisfy_c(), 100 + trial);
    const AgentSet faulty = AgentSet::single(rng.below(n));
    for (std::size_t threshold : {std::size_t{2}, std::size_t{3}}) {
      for (const auto& adversary : {strategy_silent(), strategy_random(trial), strategy_universe()}) {
        auto sync = run_constrained(g, inst, faulty, adversary, {n, threshold, true});
        auto async = run_constrained_async(g, inst, faulty, adversary, DeliverySchedule::synchronous(),
                                           {threshold, n});
        // The state changes line up step for step.
        auto changes = [](const Transcript& t) {
          std::vector<std::tuple<std::size_t, AgentId, ValueSet>> out;
          for (const auto& e : t.events)
            if (e.kind == EventKind::StateChange) out.emplace_back(e.step, e.sender, e.payload);
          return out;
        };
        auto a = changes(async.transcript);
        auto s = changes(sync.transcript);
        if (!sync.outcome.converged) {
          // The async run keeps going until max_steps; compare the common prefix.
          a.resize(std::min(a.size(), s.size()));
        }
        CHECK(a == s);
        CHECK(async.outcome.converged == sync.outcome.converged);
      }
    }
  }
}

TEST_CASE("random delays: different transcripts, same decisions") {
  auto g = CommGraph::complete(5);
  std::set<std::uint64_t> digests;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = generate_instance(4, 5, 1, InstanceTarget::satisfy_3f(), seed);
    REQUIRE(check_3f_redundancy(inst).holds);
    auto r1 = run_constrained_async(g, inst, {4}, strategy_random(seed), DeliverySchedule::random_delay(4, seed));
    auto r2 = run_constrained_async(g, inst, {4}, strategy_random(seed), DeliverySchedule::random_delay(4, seed + 99));
    CHECK(r1.outcome.converged);
    CHECK(r2.outcome.converged);
    CHECK(r1.outcome.decided == r2.outcome.decided);
    CHECK(r1.transcript ==
          run_constrained_async(g, inst, {4}, strategy_random(seed), DeliverySchedule::random_delay(4, seed)).transcript);
    digests.insert(transcript_digest(r1.transcript, inst.universe));
    digests.insert(transcript_digest(r2.transcript, inst.universe));
  }
  CHECK(digests.size() > 20);
}

TEST_CASE("async fairness and causality") {
  auto g = CommGraph::complete(5);
  auto inst = generate_instance(3, 5, 1, InstanceTarget::satisfy_c(), 3);
  const std::set<std::pair<AgentId, AgentId>> starved{{1, 0}};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto run = run_constrained_async(g, inst, {4}, strategy_random(seed), DeliverySchedule::starve(3, starved, seed));
    std::multiset<std::tuple<AgentId, AgentId, std::size_t, std::uint64_t>> in_flight;
    for (const auto& e : run.transcript.events) {
      auto key = std::make_tuple(e.sender, e.receiver, e.tag.value_or(0), e.payload.bits());
      if (e.kind == EventKind::Send && !starved.count({e.sender, e.receiver})) in_flight.insert(key);
      if (e.kind == EventKind::Deliver) {
        auto it = in_flight.find(key);
        REQUIRE(it != in_flight.end());  // every delivery follows its send
        in_flight.erase(it);
      }
    }
    CHECK(in_flight.empty());  // every non-starved send is delivered
    CHECK(run.outcome.decided[0].has_value());
  }
}

#include <fstream>
#include <sstream>

#include "byzset/cli.hpp"
#include "byzset/error.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace byzset;
using byzset::testing::random_graph;

namespace {

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(BYZSET_FIXTURES) + "/" + name);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t error_line(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

const std::string kK4 =
    "n 4 f 1\nedge 0 1\nedge 0 2\nedge 0 3\nedge 1 0\nedge 1 2\nedge 1 3\n"
    "edge 2 0\nedge 2 1\nedge 2 3\nedge 3 0\nedge 3 1\nedge 3 2\n";

std::string detail(const RunRecord& r, const std::string& key) {
  for (const auto& [k, v] : r.details)
    if (k == key) return v;
  return "<missing>";
}

}  // namespace

TEST_CASE("parse_scenario: minimal certify and located errors") {
  auto s = parse_scenario(kK4 + "mode certify\n");
  CHECK(s.mode == Mode::Certify);
  CHECK(s.graph == CommGraph::complete(4));
  CHECK(s.f == 1);

  const std::string inst = "universe a b\nagent 0: a\nagent 1: a\nagent 2: a\nagent 3: a\n";
  CHECK(error_line(kK4 + inst + "agent 4: a\nmode run_constrained\n") == 19);
  CHECK(error_line(kK4 + inst + "mode run_constrained\nfaults 5\n") == 20);
  CHECK(error_line(kK4 + inst + "mode run_constrained\nfaults 0 1\n") == 20);
  CHECK(error_line(kK4 + "mode certify\nmode certify\n") == 15);
  CHECK(error_line(kK4 + "bogus 1\nmode certify\n") == 14);
  CHECK(error_line(kK4) == 13);  // missing mode
  CHECK(error_line(kK4 + inst + "mode run_constrained\nadversary include_y zz\n") == 20);
  CHECK(error_line(kK4 + inst + "mode run_constrained\nfaults sweep_all\nadversary silent\n") == 21);
  CHECK(error_line(kK4 + inst + "mode run_async\nschedule starve 2 1:0 2:0\n") == 20);
  CHECK(error_line(kK4 + "f 2\nmode certify\n") == 1);
  CHECK(error_line(kK4 + inst + "mode check_redundancy\n") == 19);  // no property line
}

TEST_CASE("golden K5 scenario parses to the walkthrough inputs") {
  auto s = parse_scenario(fixture("k5_golden.scenario"));
  CHECK(s.mode == Mode::RunConstrained);
  CHECK(s.graph == CommGraph::complete(5));
  REQUIRE(s.instance);
  CHECK(*s.instance == SetInstance{Universe({"a", "b"}), {{0}, {0}, {0, 1}, {0, 1}, {0}}, 1});
  CHECK(s.faults == AgentSet{4});
  CHECK(s.adversary == AdversarySpec{"constant", {"a", "b"}});

  auto report = run_scenario(s);
  REQUIRE(report.runs() == 1);
  CHECK(report.records[0].ok);
  CHECK(report.records[0].rounds == 1);
  CHECK(report.records[0].transcript == fixture("k5_golden.transcript"));
}

TEST_CASE("scenario round trip") {
  for (const auto* name : {"k5_golden.scenario", "k5_sweep.scenario", "cycle4_attack.scenario"}) {
    auto s = parse_scenario(fixture(name));
    CHECK(parse_scenario(format_scenario(s)) == s);
  }
  Rng rng(3);
  const Mode modes[] = {Mode::Certify,   Mode::CheckRedundancy, Mode::RunConstrained, Mode::RunUnconstrained,
                        Mode::RunAsync,  Mode::RunCentralized,  Mode::Optimize,       Mode::AttackDemo};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.below(4);
    Scenario s;
    s.mode = modes[rng.below(8)];
    s.f = rng.below(2);
    s.seed = rng.next();
    s.schedule.seed = s.seed;
    s.graph = random_graph(n, rng);
    if (s.mode == Mode::Optimize) {
      s.profile = generate_profile(5, n, s.f, InstanceTarget::satisfy_c(), trial);
    } else if (s.mode != Mode::Certify && s.mode != Mode::AttackDemo) {
      s.instance = generate_instance(3, n, s.f, InstanceTarget::satisfy_c(), trial);
    }
    if (s.mode == Mode::CheckRedundancy) {
      s.property = static_cast<Property>(rng.below(4));
      if (rng.chance(1, 2) && *s.property != Property::D) s.graph.reset();
    }
    if (s.mode == Mode::RunCentralized && rng.chance(1, 2)) s.graph.reset();
    if (s.mode == Mode::RunConstrained || s.mode == Mode::RunUnconstrained || s.mode == Mode::RunAsync ||
        s.mode == Mode::RunCentralized || s.mode == Mode::Optimize) {
      if (rng.chance(1, 3)) {
        s.faults = std::nullopt;
      } else {
        s.faults = rng.subset_of_size(AgentSet::range(n), s.f);
        s.adversary = rng.chance(1, 2) ? AdversarySpec{"random", {std::to_string(trial)}} : AdversarySpec{"silent", {}};
      }
    }
    if (s.mode == Mode::RunConstrained || s.mode == Mode::RunAsync) s.max_rounds = rng.below(3);
    if (s.mode == Mode::RunAsync && rng.chance(1, 2)) s.schedule = DeliverySchedule::random_delay(3, s.seed);
    validate_scenario(s);
    auto text = format_scenario(s);
    auto back = parse_scenario(text);
    CHECK(back == s);
    CHECK(format_scenario(back) == text);
  }
}

TEST_CASE("certify: complete K4 holds, the 4-cycle fails") {
  auto report = run_scenario(parse_scenario(kK4 + "mode certify\n"));
  REQUIRE(report.runs() == 1);
  CHECK(detail(report.records[0], "condition_a") == "holds");
  CHECK(detail(report.records[0], "condition_b") == "holds");
  CHECK(exit_code(report) == 0);

  auto ring = run_scenario(parse_scenario("n 4 f 1\nedge 0 1\nedge 1 2\nedge 2 3\nedge 3 0\nmode certify\n"));
  CHECK(detail(ring.records[0], "condition_a").rfind("fails", 0) == 0);
  CHECK(detail(ring.records[0], "condition_b").rfind("fails", 0) == 0);
  CHECK(exit_code(ring) == 1);
  CHECK(!ring.records[0].replay.empty());
}

TEST_CASE("attack_demo on the 4-cycle") {
  auto report = run_scenario(parse_scenario(fixture("cycle4_attack.scenario")));
  REQUIRE(report.runs() == 1);
  const auto& r = report.records[0];
  CHECK(r.ok);
  CHECK(r.outcome == "reproduced");
  CHECK(detail(r, "victim") == "0");
  CHECK(detail(r, "indistinguishable") == "yes");
  CHECK(detail(r, "correct_a") != detail(r, "correct_b"));
  CHECK(detail(r, "digest_a") != detail(r, "digest_b"));
  // The victim answers the same in both executions, so it is wrong in one.
  CHECK(detail(r, "victim_output_a") == detail(r, "victim_output_b"));

  // A graph meeting the condition has nothing to demonstrate.
  auto none = run_scenario(parse_scenario(kK4 + "mode attack_demo\n"));
  CHECK(none.records[0].outcome == "not_applicable");
}

TEST_CASE("sweep on the golden K5 instance") {
  auto s = parse_scenario(fixture("k5_sweep.scenario"));
  auto report = run_scenario(s, 4);
  CHECK(report.runs() == fault_placements(5, 1).size() * 8);
  CHECK(report.runs() == 48);
  CHECK(report.failures() == 0);
  CHECK(report.max_rounds() <= 3);
  CHECK(exit_code(report) == 0);
  CHECK(std::is_sorted(report.records.begin(), report.records.end(),
                       [](const RunRecord& a, const RunRecord& b) { return a.hash < b.hash; }));
  // Parallelism does not change the report.
  CHECK(emit_report(run_scenario(s, 1), ReportFormat::Structured) == emit_report(report, ReportFormat::Structured));
}

TEST_CASE("sweep completeness across modes") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 4 + rng.below(2);
    const std::size_t f = 1;
    Scenario s;
    s.mode = trial % 2 ? Mode::RunCentralized : Mode::RunConstrained;
    s.f = f;
    s.graph = CommGraph::complete(n);
    s.instance = generate_instance(3, n, f, InstanceTarget::satisfy_c(), trial);
    s.faults = std::nullopt;
    auto report = run_scenario(s, 2);
    CHECK(report.runs() == fault_placements(n, f).size() * 8);
    CHECK(expand_runs(s).size() == report.runs());
  }
}

TEST_CASE("emit_report") {
  Report empty;
  CHECK(emit_report(empty, ReportFormat::Structured) == "summary.runs=0\nsummary.failures=0\nsummary.max_rounds=0\n");
  CHECK(emit_report(empty, ReportFormat::Text).find("0 runs") != std::string::npos);

  auto single = run_scenario(parse_scenario(kK4 + "mode certify\n"));
  auto text = emit_report(single, ReportFormat::Structured);
  CHECK(std::count(text.begin(), text.end(), '\n') > 3);
  CHECK(text.find("record=") == 0);
  CHECK(text.find("record=", 1) == std::string::npos);
  CHECK(parse_report(text).records == single.records);
}

TEST_CASE("golden report is re-emitted byte for byte") {
  const auto golden = fixture("k5_sweep.report");
  auto parsed = parse_report(golden);
  CHECK(parsed.runs() == 48);
  CHECK(emit_report(parsed, ReportFormat::Structured) == golden);
  auto fresh = run_scenario(parse_scenario(fixture("k5_sweep.scenario")), 3);
  CHECK(emit_report(fresh, ReportFormat::Structured) == golden);

  CHECK_THROWS_AS(parse_report("record=00\n"), ParseError);
  CHECK_THROWS_AS(parse_report(golden.substr(0, golden.size() / 2)), ParseError);
  auto tampered = golden;
  tampered.replace(tampered.find("seed 7"), 6, "seed 8");
  CHECK_THROWS_AS(parse_report(tampered), ParseError);
}

TEST_CASE("replay reproduces every record") {
  auto report = run_scenario(parse_scenario(fixture("k5_sweep.scenario")), 2);
  for (const auto& r : report.records) {
    auto again = replay_record(r);
    CHECK(again == r);
    CHECK(again.transcript == r.transcript);
  }
  for (const auto& r : parse_report(fixture("k5_sweep.report")).records) CHECK(replay_record(r) == r);
}

TEST_CASE("sub-run errors carry the sub-run identity") {
  // The 4-cycle has too few disjoint paths for relaying.
  auto s = parse_scenario(
      "n 4 f 1\nedge 0 1\nedge 1 2\nedge 2 3\nedge 3 0\nuniverse a\nagent 0: a\nagent 1: a\nagent 2: a\nagent 3: a\n"
      "mode run_unconstrained\nfaults 2\nadversary silent\n");
  try {
    run_scenario(s);
    FAIL("expected an error");
  } catch (const SubRunError& e) {
    std::string what = e.what();
    CHECK(what.find("run_unconstrained") != std::string::npos);
    CHECK(what.find("faults=2") != std::string::npos);
    CHECK(what.find("adversary silent") != std::string::npos);
  }
}

TEST_CASE("check_redundancy and optimize dispatch") {
  auto c = run_scenario(parse_scenario(fixture("k5.instance") + "mode check_redundancy\nproperty c\n"));
  CHECK(c.records[0].ok);
  auto b = run_scenario(parse_scenario(fixture("k5_violating.instance") + "mode check_redundancy\nproperty b\n"));
  CHECK_FALSE(b.records[0].ok);
  CHECK(detail(b.records[0], "verdict").find("kind=") != std::string::npos);

  Scenario opt;
  opt.mode = Mode::Optimize;
  opt.graph = CommGraph::complete(5);
  opt.profile = parse_profile_text(fixture("k5.profile"));
  opt.f = 1;
  opt.faults = std::nullopt;
  auto report = run_scenario(opt, 2);
  CHECK(report.runs() == 48);
  CHECK(report.failures() == 0);
  for (const auto& r : report.records) CHECK(detail(r, "aggregate_argmin") != "<missing>");
}

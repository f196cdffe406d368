#include "byzset/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

#include "byzset/error.hpp"
#include "byzset/protocols.hpp"
#include "byzset/random.hpp"

namespace byzset {

namespace {

const std::vector<std::pair<Mode, std::string>> kModes = {
    {Mode::Certify, "certify"},
    {Mode::CheckRedundancy, "check_redundancy"},
    {Mode::RunConstrained, "run_constrained"},
    {Mode::RunUnconstrained, "run_unconstrained"},
    {Mode::RunAsync, "run_async"},
    {Mode::RunCentralized, "run_centralized"},
    {Mode::Optimize, "optimize"},
    {Mode::AttackDemo, "attack_demo"},
};

const std::vector<std::pair<Property, std::string>> kProperties = {
    {Property::B, "b"}, {Property::C, "c"}, {Property::ThreeF, "3f"}, {Property::D, "d"}};

bool runs_protocol(Mode m) {
  return m == Mode::RunConstrained || m == Mode::RunUnconstrained || m == Mode::RunAsync ||
         m == Mode::RunCentralized || m == Mode::Optimize;
}

std::string ids(AgentSet s) {
  if (s.empty()) return "-";
  std::string out;
  for (auto i : s) out += (out.empty() ? "" : ",") + std::to_string(i);
  return out;
}

std::string values(const Universe& u, ValueSet s) {
  if (s.empty()) return "-";
  std::string out;
  for (auto v : s) out += (out.empty() ? "" : ",") + u.token(v);
  return out;
}

std::string points(const PointSet& s) {
  if (s.empty()) return "-";
  std::string out;
  for (auto x : s) out += (out.empty() ? "" : ",") + std::to_string(x);
  return out;
}

std::string edge_list(const std::vector<Edge>& edges) {
  if (edges.empty()) return "-";
  std::string out;
  for (const auto& e : edges) out += (out.empty() ? "" : ",") + std::to_string(e.from) + ">" + std::to_string(e.to);
  return out;
}

std::string hex(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::uint64_t parse_hex(std::size_t line, const std::string& s) {
  if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw ParseError(line, "expected 16 hex digits, got '" + s + "'");
  }
  return std::stoull(s, nullptr, 16);
}

// ---------------------------------------------------------------------------
// Scenario parsing

AgentSet parse_id_list(const text::Line& line, std::size_t first) {
  AgentSet out;
  if (line.tokens.size() == first + 1 && line.tokens[first] == "-") return out;
  for (std::size_t k = first; k < line.tokens.size(); ++k) {
    std::stringstream ss(line.tokens[k]);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
      auto id = text::parse_u64(line, piece);
      if (id >= kMaxSetWidth) throw ParseError(line.number, "agent id " + piece + " exceeds 63");
      out.insert(static_cast<AgentId>(id));
    }
  }
  return out;
}

DeliverySchedule parse_schedule(const text::Line& line) {
  const auto& t = line.tokens;
  if (t.size() < 2) throw ParseError(line.number, "expected 'schedule <policy> ...'");
  if (t[1] == "synchronous") {
    if (t.size() != 2) throw ParseError(line.number, "'schedule synchronous' takes no arguments");
    return DeliverySchedule::synchronous();
  }
  if (t.size() < 3) throw ParseError(line.number, "expected a maximum delay");
  auto max_delay = text::parse_index(line, 2);
  if (t[1] == "random_delay") {
    if (t.size() != 3) throw ParseError(line.number, "expected 'schedule random_delay <max>'");
    return DeliverySchedule::random_delay(max_delay, 0);
  }
  if (t[1] == "starve") {
    std::set<std::pair<AgentId, AgentId>> links;
    for (std::size_t k = 3; k < t.size(); ++k) {
      auto colon = t[k].find(':');
      if (colon == std::string::npos) throw ParseError(line.number, "expected '<from>:<to>', got '" + t[k] + "'");
      auto from = text::parse_u64(line, t[k].substr(0, colon));
      auto to = text::parse_u64(line, t[k].substr(colon + 1));
      links.insert({static_cast<AgentId>(from), static_cast<AgentId>(to)});
    }
    return DeliverySchedule::starve(max_delay, std::move(links), 0);
  }
  throw ParseError(line.number, "unknown schedule policy '" + t[1] + "'");
}

std::string format_schedule(const DeliverySchedule& s) {
  switch (s.policy) {
    case DeliverySchedule::Policy::Synchronous:
      return "schedule synchronous";
    case DeliverySchedule::Policy::RandomDelay:
      return "schedule random_delay " + std::to_string(s.max_delay);
    case DeliverySchedule::Policy::Starve: {
      std::string out = "schedule starve " + std::to_string(s.max_delay);
      for (auto [from, to] : s.starved) out += " " + std::to_string(from) + ":" + std::to_string(to);
      return out;
    }
  }
  return {};
}

// Agent id of an instance or profile line, for range errors with a location.
std::optional<std::size_t> agent_line_id(const text::Line& line) {
  if (line.tokens.size() < 2) return std::nullopt;
  std::string id = line.tokens[1];
  if (!id.empty() && id.back() == ':') id.pop_back();
  if (id.empty() || id.find_first_not_of("0123456789") != std::string::npos || id.size() > 6) return std::nullopt;
  return std::stoul(id);
}

bool same_schedule(const DeliverySchedule& a, const DeliverySchedule& b) {
  return a.policy == b.policy && a.seed == b.seed && a.max_delay == b.max_delay && a.starved == b.starved;
}

}  // namespace

std::string mode_name(Mode m) {
  for (const auto& [mode, name] : kModes)
    if (mode == m) return name;
  return "?";
}

std::string property_name(Property p) {
  for (const auto& [prop, name] : kProperties)
    if (prop == p) return name;
  return "?";
}

std::size_t Scenario::agent_count() const {
  if (graph) return graph->size();
  if (instance) return instance->size();
  if (profile) return profile->size();
  return 0;
}

bool operator==(const Scenario& a, const Scenario& b) {
  return a.mode == b.mode && a.f == b.f && a.graph == b.graph && a.instance == b.instance && a.profile == b.profile &&
         a.faults == b.faults && a.adversary == b.adversary && a.seed == b.seed && a.max_rounds == b.max_rounds &&
         same_schedule(a.schedule, b.schedule) && a.property == b.property;
}

void validate_scenario(const Scenario& s) {
  const bool needs_graph = s.mode != Mode::CheckRedundancy && s.mode != Mode::RunCentralized;
  if (needs_graph && !s.graph) throw ValidationError(mode_name(s.mode) + " needs a graph");
  const bool needs_instance = s.mode == Mode::CheckRedundancy || s.mode == Mode::RunConstrained ||
                              s.mode == Mode::RunUnconstrained || s.mode == Mode::RunAsync ||
                              s.mode == Mode::RunCentralized;
  if (needs_instance && !s.instance) throw ValidationError(mode_name(s.mode) + " needs a set instance");
  if (s.mode == Mode::Optimize && !s.profile) throw ValidationError("optimize needs a cost profile");
  if (s.instance && s.profile) throw ValidationError("a scenario holds a set instance or a cost profile, not both");

  const std::size_t n = s.agent_count();
  if (n > kMaxSetWidth) throw ValidationError("at most 64 agents are supported");
  if (s.instance) {
    s.instance->validate();
    if (s.instance->f != s.f) throw ValidationError("instance f differs from scenario f");
    if (s.instance->size() != n) {
      throw ValidationError("instance has " + std::to_string(s.instance->size()) + " agents, graph has " +
                            std::to_string(n));
    }
  }
  if (s.profile) {
    if (s.profile->f != s.f) throw ValidationError("profile f differs from scenario f");
    if (s.profile->size() != n) {
      throw ValidationError("profile has " + std::to_string(s.profile->size()) + " agents, graph has " +
                            std::to_string(n));
    }
  }

  if (runs_protocol(s.mode)) {
    if (s.faults) {
      if (!s.faults->subset_of(AgentSet::range(n))) throw ValidationError("faulty id out of range");
      if (s.faults->size() > s.f) {
        throw ValidationError("|F| = " + std::to_string(s.faults->size()) + " exceeds f = " + std::to_string(s.f));
      }
    } else if (s.adversary != AdversarySpec{}) {
      throw ValidationError("sweep_all runs the whole catalogue; drop the adversary line");
    }
    if (s.mode == Mode::Optimize) {
      make_strategy(s.adversary, lift_to_instance(*s.profile));
    } else {
      make_strategy(s.adversary, *s.instance);
    }
  } else {
    if (s.faults != AgentSet{}) throw ValidationError("faults apply only to protocol runs");
    if (s.adversary != AdversarySpec{}) throw ValidationError("an adversary applies only to protocol runs");
  }

  if (s.mode == Mode::CheckRedundancy) {
    if (!s.property) throw ValidationError("check_redundancy needs a 'property' line");
    if (*s.property == Property::D && !s.graph) throw ValidationError("property d needs a graph");
  } else if (s.property) {
    throw ValidationError("'property' applies only to check_redundancy");
  }
  if (s.schedule.seed != s.seed) throw ValidationError("schedule seed must equal the scenario seed");
  if (s.mode == Mode::RunAsync) {
    validate_schedule(s.schedule, *s.graph, s.f);
  } else if (s.schedule.policy != DeliverySchedule::Policy::Synchronous) {
    throw ValidationError("'schedule' applies only to run_async");
  }
  if (s.max_rounds && s.mode != Mode::RunConstrained && s.mode != Mode::RunAsync) {
    throw ValidationError("'max_rounds' applies only to run_constrained and run_async");
  }
}

Scenario parse_scenario(std::string_view text) {
  const auto lines = text::tokenize(text);
  std::vector<text::Line> graph_lines, instance_lines, profile_lines;
  std::map<std::string, const text::Line*> keyed;
  std::optional<std::size_t> f_line_value;
  std::optional<std::size_t> header_f;
  const text::Line* header = nullptr;

  for (const auto& line : lines) {
    const auto& kw = line.tokens[0];
    if (kw == "n" || kw == "edge") {
      if (kw == "n") {
        header = &line;
        if (line.tokens.size() == 4 && line.tokens[2] == "f") header_f = text::parse_index(line, 3);
      }
      graph_lines.push_back(line);
    } else if (kw == "universe") {
      instance_lines.push_back(line);
    } else if (kw == "domain") {
      profile_lines.push_back(line);
    } else if (kw == "agent") {
      bool argmin = line.tokens.size() >= 3 && line.tokens[2] == "argmin:";
      (argmin ? profile_lines : instance_lines).push_back(line);
    } else if (kw == "f") {
      if (f_line_value) throw ParseError(line.number, "duplicate 'f' line");
      if (line.tokens.size() != 2) throw ParseError(line.number, "expected 'f <bound>'");
      f_line_value = text::parse_index(line, 1);
    } else if (kw == "mode" || kw == "faults" || kw == "adversary" || kw == "seed" || kw == "max_rounds" ||
               kw == "schedule" || kw == "property") {
      if (keyed.count(kw)) throw ParseError(line.number, "duplicate '" + kw + "' line");
      keyed[kw] = &line;
    } else {
      throw ParseError(line.number, "unknown keyword '" + kw + "'");
    }
  }
  const std::size_t last = lines.empty() ? 1 : lines.back().number;
  if (header_f && f_line_value && *header_f != *f_line_value) {
    throw ParseError(header->number, "f on the 'n' line disagrees with the 'f' line");
  }

  Scenario s;
  s.f = f_line_value.value_or(header_f.value_or(0));
  if (!graph_lines.empty()) s.graph = parse_graph_lines(graph_lines).graph;
  if (!instance_lines.empty() && !profile_lines.empty()) {
    throw ParseError(profile_lines.front().number, "a scenario holds a set instance or a cost profile, not both");
  }
  if (s.graph) {
    for (const auto* group : {&instance_lines, &profile_lines}) {
      for (const auto& line : *group) {
        if (line.tokens[0] != "agent") continue;
        auto id = agent_line_id(line);
        if (id && *id >= s.graph->size()) {
          throw ParseError(line.number, "agent id " + std::to_string(*id) + " out of range for n = " +
                                            std::to_string(s.graph->size()));
        }
      }
    }
  }
  if (!instance_lines.empty()) {
    s.instance = parse_instance_lines(instance_lines);
    s.instance->f = s.f;
  }
  if (!profile_lines.empty()) {
    s.profile = parse_profile_lines(profile_lines);
    s.profile->f = s.f;
  }

  auto get = [&](const std::string& key) -> const text::Line* {
    auto it = keyed.find(key);
    return it == keyed.end() ? nullptr : it->second;
  };
  const text::Line* mode = get("mode");
  if (!mode) throw ParseError(last, "missing 'mode' line");
  if (mode->tokens.size() != 2) throw ParseError(mode->number, "expected 'mode <name>'");
  auto m = std::find_if(kModes.begin(), kModes.end(), [&](const auto& e) { return e.second == mode->tokens[1]; });
  if (m == kModes.end()) throw ParseError(mode->number, "unknown mode '" + mode->tokens[1] + "'");
  s.mode = m->first;

  if (const auto* line = get("seed")) {
    if (line->tokens.size() != 2) throw ParseError(line->number, "expected 'seed <u64>'");
    s.seed = text::parse_u64(*line, line->tokens[1]);
  }
  if (const auto* line = get("max_rounds")) {
    if (line->tokens.size() != 2) throw ParseError(line->number, "expected 'max_rounds <k>'");
    s.max_rounds = text::parse_index(*line, 1);
  }
  if (const auto* line = get("property")) {
    if (line->tokens.size() != 2) throw ParseError(line->number, "expected 'property <b|c|3f|d>'");
    auto p = std::find_if(kProperties.begin(), kProperties.end(),
                          [&](const auto& e) { return e.second == line->tokens[1]; });
    if (p == kProperties.end()) throw ParseError(line->number, "unknown property '" + line->tokens[1] + "'");
    s.property = p->first;
  }
  if (const auto* line = get("schedule")) s.schedule = parse_schedule(*line);
  s.schedule.seed = s.seed;
  if (const auto* line = get("adversary")) s.adversary = parse_adversary_spec(*line);

  const std::size_t n = s.agent_count();
  if (const auto* line = get("faults")) {
    if (line->tokens.size() < 2) throw ParseError(line->number, "expected 'faults <ids>', 'faults -' or 'faults sweep_all'");
    if (line->tokens.size() == 2 && line->tokens[1] == "sweep_all") {
      s.faults = std::nullopt;
    } else {
      s.faults = parse_id_list(*line, 1);
      for (auto i : *s.faults) {
        if (i >= n) {
          throw ParseError(line->number, "faulty id " + std::to_string(i) + " out of range for n = " +
                                             std::to_string(n));
        }
      }
      if (s.faults->size() > s.f) {
        throw ParseError(line->number, "|F| = " + std::to_string(s.faults->size()) + " exceeds f = " +
                                           std::to_string(s.f));
      }
    }
  }

  // Semantic errors point at the line that introduced the offending field.
  try {
    validate_scenario(s);
  } catch (const ValidationError& e) {
    const text::Line* at = nullptr;
    std::string what = e.what();
    if (what.find("adversary") != std::string::npos || what.find("value") != std::string::npos) at = get("adversary");
    if (what.find("schedule") != std::string::npos || what.find("starv") != std::string::npos ||
        what.find("delay") != std::string::npos)
      at = get("schedule");
    if (what.find("property") != std::string::npos) at = get("property");
    if (what.find("faults") != std::string::npos) at = get("faults");
    if (what.find("max_rounds") != std::string::npos) at = get("max_rounds");
    if (!at) at = mode;
    throw ParseError(at->number, what);
  }
  return s;
}

std::string format_scenario(const Scenario& s) {
  std::string out;
  auto drop_f = [](const std::string& body) {
    std::string kept;
    std::stringstream ss(body);
    std::string line;
    while (std::getline(ss, line))
      if (line.rfind("f ", 0) != 0) kept += line + "\n";
    return kept;
  };
  if (s.graph) {
    out += format_graph_text(*s.graph, s.f);
  } else {
    out += "f " + std::to_string(s.f) + "\n";
  }
  if (s.instance) out += drop_f(format_instance_text(*s.instance));
  if (s.profile) out += drop_f(format_profile_text(*s.profile));
  out += "mode " + mode_name(s.mode) + "\n";
  if (runs_protocol(s.mode)) {
    out += "faults " + (s.faults ? ids(*s.faults) : std::string("sweep_all")) + "\n";
    if (s.faults) out += format_adversary_spec(s.adversary) + "\n";
  }
  out += "seed " + std::to_string(s.seed) + "\n";
  if (s.max_rounds) out += "max_rounds " + std::to_string(s.max_rounds) + "\n";
  if (s.mode == Mode::RunAsync) out += format_schedule(s.schedule) + "\n";
  if (s.property) out += "property " + property_name(*s.property) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Runs

namespace {

std::string describe(const PartitionWitness& w) {
  return "L=" + ids(w.partition.left) + " R=" + ids(w.partition.right) + " F=" + ids(w.partition.faulty) +
         " threshold=" + std::to_string(w.threshold) + " clause=" + (w.left_clause ? "left" : "right");
}

std::string describe(const ConditionVerdict& v) {
  if (v.holds) return "holds";
  if (const auto* p = std::get_if<PartitionWitness>(&v.witness)) return "fails " + describe(*p);
  if (const auto* s = std::get_if<SourceWitness>(&v.witness)) {
    return "fails F=" + ids(s->reduced.faulty()) + " removed=" + edge_list(s->reduced.removed_edges()) +
           " component=" + ids(s->component);
  }
  if (const auto* c = std::get_if<CutWitness>(&v.witness)) {
    if (c->complete_graph) return "fails complete_graph";
    return "fails from=" + std::to_string(c->from) + " to=" + std::to_string(c->to) + " cut=" + ids(c->separating_set);
  }
  return "fails";
}

std::string describe(const RedundancyVerdict& v, const Universe& u) {
  if (v.holds) return "holds";
  if (!v.witness) return "fails";
  const auto& w = *v.witness;
  static const char* kinds[] = {"empty_intersection", "subset", "absence", "source_component", "unequal"};
  std::string out = std::string("fails kind=") + kinds[static_cast<int>(w.kind)] + " agents=" + ids(w.agents);
  if (w.value) out += " value=" + u.token(*w.value);
  if (w.kind == WitnessKind::Absence) out += " threshold=" + std::to_string(w.threshold);
  if (w.reduced) out += " F=" + ids(w.reduced->faulty()) + " removed=" + edge_list(w.reduced->removed_edges());
  return out;
}

std::string outputs_of(const Universe& u, const std::vector<std::optional<ValueSet>>& decided) {
  std::string out;
  for (std::size_t i = 0; i < decided.size(); ++i) {
    if (!decided[i]) continue;
    out += (out.empty() ? "" : " ") + std::to_string(i) + ":" + values(u, *decided[i]);
  }
  return out.empty() ? "-" : out;
}

// No honest state ever drops a value of the honest intersection.
bool safe(const Execution& ex) {
  for (const auto& e : ex.transcript.events) {
    if (e.kind == EventKind::StateChange && !ex.outcome.target.subset_of(e.payload)) return false;
  }
  return true;
}

void protocol_record(RunRecord& r, const Execution& ex, const Universe& u) {
  r.ok = ex.outcome.converged && safe(ex);
  r.outcome = !ex.outcome.converged ? "not_converged" : safe(ex) ? "converged" : "unsafe";
  r.rounds = ex.outcome.rounds_elapsed;
  r.details.push_back({"target", values(u, ex.outcome.target)});
  r.details.push_back({"outputs", outputs_of(u, ex.outcome.decided)});
  r.transcript = dump_transcript(ex.transcript, u);
  r.digest = fnv1a(r.transcript);
}

RunRecord execute(const Scenario& s) {
  RunRecord r;
  std::string replay = format_scenario(s);
  if (!replay.empty() && replay.back() == '\n') replay.pop_back();
  std::replace(replay.begin(), replay.end(), '\n', ';');
  r.replay = replay;
  r.hash = fnv1a(r.replay);
  r.mode = mode_name(s.mode);
  r.faults = runs_protocol(s.mode) ? ids(*s.faults) : "-";
  r.adversary = runs_protocol(s.mode) ? format_adversary_spec(s.adversary).substr(10) : "-";
  const AgentSet faulty = s.faults.value_or(AgentSet{});

  switch (s.mode) {
    case Mode::Certify: {
      const auto& g = *s.graph;
      auto a = check_condition_a(g, s.f);
      auto b = check_condition_b(g, s.f);
      auto async = check_condition_async(g, s.f);
      auto conn = check_connectivity(g, 2 * s.f + 1);
      r.ok = a.holds && b.holds;
      r.outcome = r.ok ? "holds" : "fails";
      r.details.push_back({"condition_a", describe(a)});
      r.details.push_back({"condition_b", describe(b)});
      r.details.push_back({"condition_async", describe(async)});
      r.details.push_back({"connectivity", std::to_string(vertex_connectivity(g))});
      r.details.push_back({"connected_2f_plus_1", describe(conn)});
      if (g.size() > 3 * s.f) r.details.push_back({"single_source", single_source_check(g, s.f) ? "holds" : "fails"});
      break;
    }
    case Mode::CheckRedundancy: {
      const auto& inst = *s.instance;
      RedundancyVerdict v;
      switch (*s.property) {
        case Property::B: v = check_property_b(inst); break;
        case Property::C: v = check_property_c(inst); break;
        case Property::ThreeF: v = check_3f_redundancy(inst); break;
        case Property::D: v = check_property_d(inst, *s.graph); break;
      }
      r.ok = v.holds;
      r.outcome = v.holds ? "holds" : "fails";
      r.details.push_back({"property", property_name(*s.property)});
      r.details.push_back({"verdict", describe(v, inst.universe)});
      r.details.push_back({"intersection", values(inst.universe, intersect_or_universe(inst, inst.agents()))});
      break;
    }
    case Mode::RunConstrained: {
      const auto& inst = *s.instance;
      auto ex = run_constrained(*s.graph, inst, faulty, make_strategy(s.adversary, inst), {s.max_rounds, 0, true});
      protocol_record(r, ex, inst.universe);
      break;
    }
    case Mode::RunUnconstrained: {
      const auto& inst = *s.instance;
      auto run = run_unconstrained(*s.graph, inst, faulty, make_strategy(s.adversary, inst));
      protocol_record(r, run.execution, inst.universe);
      break;
    }
    case Mode::RunAsync: {
      const auto& inst = *s.instance;
      auto ex = run_constrained_async(*s.graph, inst, faulty, make_strategy(s.adversary, inst), s.schedule,
                                      {0, s.max_rounds});
      protocol_record(r, ex, inst.universe);
      break;
    }
    case Mode::RunCentralized: {
      const auto& inst = *s.instance;
      const CommGraph g = s.graph ? *s.graph : CommGraph::complete(inst.size());
      auto strategy = make_strategy(s.adversary, inst);
      std::vector<ValueSet> reported = inst.locals;
      for (auto i : faulty) {
        SendContext ctx{1, i, i, inst.locals[i], &inst, &g, faulty};
        reported[i] = strategy.on_send(ctx).value_or(inst.universe.all());
      }
      auto res = run_centralized(inst, reported);
      const ValueSet target = intersect_or_universe(inst, inst.agents() - faulty);
      r.ok = res.value && *res.value == target;
      r.outcome = !res.value ? "no_quorum" : r.ok ? "correct" : "incorrect";
      r.details.push_back({"target", values(inst.universe, target)});
      r.details.push_back({"output", res.value ? values(inst.universe, *res.value) : "none"});
      r.details.push_back({"quorum", res.chosen ? ids(*res.chosen) : "none"});
      break;
    }
    case Mode::Optimize: {
      const auto& p = *s.profile;
      const auto lifted = lift_to_instance(p);
      auto run = solve_byz_opt(*s.graph, p, faulty, make_strategy(s.adversary, lifted));
      const AgentSet honest = p.agents() - faulty;
      const PointSet expected = honest.empty() ? p.domain.all() : aggregate_argmin(p, honest);
      std::optional<Point> agreed;
      bool agree = true, inside = true;
      std::string outs;
      for (auto i : honest) {
        const auto& x = run.outputs[i];
        outs += (outs.empty() ? "" : " ") + std::to_string(i) + ":" + (x ? std::to_string(*x) : std::string("-"));
        if (!x || !expected.count(*x)) inside = false;
        if (agreed && x != agreed) agree = false;
        agreed = x;
      }
      r.ok = run.converged && agree && inside;
      r.outcome = !run.converged ? "not_converged" : !agree ? "disagree" : !inside ? "off_argmin" : "converged";
      r.rounds = run.execution.outcome.rounds_elapsed;
      r.details.push_back({"aggregate_argmin", points(expected)});
      r.details.push_back({"outputs", outs.empty() ? "-" : outs});
      r.transcript = dump_transcript(run.execution.transcript, lifted.universe);
      r.digest = fnv1a(r.transcript);
      break;
    }
    case Mode::AttackDemo: {
      const auto& g = *s.graph;
      auto a = check_condition_a(g, s.f);
      r.details.push_back({"condition_a", describe(a)});
      if (a.holds) {
        r.ok = false;
        r.outcome = "not_applicable";
        break;
      }
      auto scenario = necessity_from_partition(g, s.f, std::get<PartitionWitness>(a.witness));
      auto demo = demonstrate_necessity(g, scenario);
      const Universe& u = scenario.instance_a.universe;
      const bool differ = demo.correct_a != demo.correct_b;
      r.ok = demo.victim_indistinguishable && differ;
      r.outcome = r.ok ? "reproduced" : "not_reproduced";
      r.rounds = demo.a.outcome.rounds_elapsed;
      r.details.push_back({"victim", std::to_string(scenario.victim)});
      r.details.push_back({"left", ids(scenario.left)});
      r.details.push_back({"right", ids(scenario.right)});
      r.details.push_back({"faulty_a", ids(scenario.faulty_a)});
      r.details.push_back({"faulty_b", ids(scenario.faulty_b)});
      r.details.push_back({"indistinguishable", demo.victim_indistinguishable ? "yes" : "no"});
      r.details.push_back({"correct_a", values(u, demo.correct_a)});
      r.details.push_back({"correct_b", values(u, demo.correct_b)});
      r.details.push_back({"victim_output_a", values(u, demo.a.outcome.decided[scenario.victim].value_or(ValueSet{}))});
      r.details.push_back({"victim_output_b", values(u, demo.b.outcome.decided[scenario.victim].value_or(ValueSet{}))});
      r.details.push_back({"digest_a", hex(transcript_digest(demo.a.transcript, u))});
      r.details.push_back({"digest_b", hex(transcript_digest(demo.b.transcript, u))});
      r.transcript = dump_transcript(demo.a.transcript, u) + "--\n" + dump_transcript(demo.b.transcript, u);
      r.digest = fnv1a(r.transcript);
      break;
    }
  }
  return r;
}

}  // namespace

bool operator==(const RunRecord& a, const RunRecord& b) {
  return a.hash == b.hash && a.mode == b.mode && a.faults == b.faults && a.adversary == b.adversary &&
         a.outcome == b.outcome && a.ok == b.ok && a.rounds == b.rounds && a.details == b.details &&
         a.digest == b.digest && a.replay == b.replay;
}

std::size_t Report::failures() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.ok; }));
}

std::size_t Report::max_rounds() const {
  std::size_t m = 0;
  for (const auto& r : records) m = std::max(m, r.rounds);
  return m;
}

std::vector<std::pair<AgentSet, AdversarySpec>> expand_runs(const Scenario& s) {
  if (!runs_protocol(s.mode)) return {{AgentSet{}, AdversarySpec{}}};
  if (s.faults) return {{*s.faults, s.adversary}};
  const SetInstance inst = s.mode == Mode::Optimize ? lift_to_instance(*s.profile) : *s.instance;
  std::vector<std::pair<AgentSet, AdversarySpec>> out;
  for (auto F : fault_placements(s.agent_count(), s.f))
    for (const auto& spec : catalogue_specs(inst, s.seed)) out.push_back({F, spec});
  return out;
}

Scenario single_run(const Scenario& s, AgentSet faulty, const AdversarySpec& adversary) {
  Scenario one = s;
  if (runs_protocol(s.mode)) {
    one.faults = faulty;
    one.adversary = adversary;
  }
  return one;
}

Report run_scenario(const Scenario& s, std::size_t jobs) {
  const auto runs = expand_runs(s);
  std::vector<RunRecord> records(runs.size());
  std::vector<std::string> errors(runs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < runs.size(); k = next++) {
      const auto& [F, spec] = runs[k];
      try {
        records[k] = execute(single_run(s, F, spec));
      } catch (const std::exception& e) {
        errors[k] = mode_name(s.mode) + " faults=" + ids(F) + " " + format_adversary_spec(spec) + ": " + e.what();
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(runs.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (!e.empty()) throw SubRunError(e);

  Report report{std::move(records)};
  std::stable_sort(report.records.begin(), report.records.end(),
                   [](const RunRecord& a, const RunRecord& b) { return a.hash < b.hash; });
  return report;
}

RunRecord replay_record(const RunRecord& r) {
  auto report = run_scenario(parse_scenario(r.replay));
  if (report.records.size() != 1) throw ValidationError("replay text does not describe a single run");
  return report.records.front();
}

// ---------------------------------------------------------------------------
// Reports

std::string emit_report(const Report& r, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::Structured) {
    for (const auto& rec : r.records) {
      out << "record=" << hex(rec.hash) << "\n";
      out << "mode=" << rec.mode << "\n";
      out << "faults=" << rec.faults << "\n";
      out << "adversary=" << rec.adversary << "\n";
      out << "outcome=" << rec.outcome << "\n";
      out << "ok=" << (rec.ok ? 1 : 0) << "\n";
      out << "rounds=" << rec.rounds << "\n";
      for (const auto& [k, v] : rec.details) out << k << "=" << v << "\n";
      if (rec.digest) out << "digest=" << hex(*rec.digest) << "\n";
      out << "replay=" << rec.replay << "\n";
    }
    out << "summary.runs=" << r.runs() << "\n";
    out << "summary.failures=" << r.failures() << "\n";
    out << "summary.max_rounds=" << r.max_rounds() << "\n";
    return out.str();
  }
  for (const auto& rec : r.records) {
    out << (rec.ok ? "ok   " : "FAIL ") << rec.mode;
    if (rec.mode != "certify" && rec.mode != "check_redundancy" && rec.mode != "attack_demo") {
      out << "  F=" << rec.faults << "  adversary: " << rec.adversary;
    }
    out << "  -> " << rec.outcome;
    if (rec.mode != "certify" && rec.mode != "check_redundancy" && rec.mode != "run_centralized") {
      out << " after " << rec.rounds << " round" << (rec.rounds == 1 ? "" : "s");
    }
    out << "\n";
    for (const auto& [k, v] : rec.details) out << "    " << k << ": " << v << "\n";
    if (rec.digest) out << "    transcript digest: " << hex(*rec.digest) << "\n";
    if (!rec.ok) out << "    replay: " << rec.replay << "\n";
  }
  out << r.runs() << " run" << (r.runs() == 1 ? "" : "s") << ", " << r.failures() << " failure"
      << (r.failures() == 1 ? "" : "s") << ", max rounds " << r.max_rounds() << "\n";
  return out.str();
}

Report parse_report(std::string_view text) {
  Report report;
  std::map<std::string, std::size_t> summary;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    ++number;
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(number, "expected 'key=value'");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "record") {
      report.records.emplace_back();
      report.records.back().hash = parse_hex(number, value);
      continue;
    }
    if (key.rfind("summary.", 0) == 0) {
      try {
        summary[key] = std::stoull(value);
      } catch (const std::exception&) {
        throw ParseError(number, "bad count '" + value + "'");
      }
      continue;
    }
    if (report.records.empty()) throw ParseError(number, "field before the first 'record='");
    auto& rec = report.records.back();
    if (key == "mode") {
      rec.mode = value;
    } else if (key == "faults") {
      rec.faults = value;
    } else if (key == "adversary") {
      rec.adversary = value;
    } else if (key == "outcome") {
      rec.outcome = value;
    } else if (key == "ok") {
      if (value != "0" && value != "1") throw ParseError(number, "ok must be 0 or 1");
      rec.ok = value == "1";
    } else if (key == "rounds") {
      try {
        rec.rounds = std::stoull(value);
      } catch (const std::exception&) {
        throw ParseError(number, "bad round count '" + value + "'");
      }
    } else if (key == "digest") {
      rec.digest = parse_hex(number, value);
    } else if (key == "replay") {
      rec.replay = value;
      if (fnv1a(rec.replay) != rec.hash) throw ParseError(number, "replay text does not match the record hash");
    } else {
      rec.details.push_back({key, value});
    }
  }
  if (summary.size() != 3 || summary["summary.runs"] != report.runs() ||
      summary["summary.failures"] != report.failures() || summary["summary.max_rounds"] != report.max_rounds()) {
    throw ParseError(number, "summary missing or inconsistent with the records");
  }
  return report;
}

int exit_code(const Report& r) { return r.failures() == 0 ? 0 : 1; }

}  // namespace byzset

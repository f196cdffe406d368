#include "byzset/redundancy.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "byzset/error.hpp"
#include "byzset/random.hpp"

namespace byzset {

Universe::Universe(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw ValidationError("universe must be nonempty");
  if (tokens_.size() > kMaxSetWidth) throw ValidationError("universe has more than 64 values");
  std::set<std::string_view> seen;
  for (const auto& t : tokens_) {
    if (!text::valid_token(t)) throw ValidationError("invalid value token '" + t + "'");
    if (!seen.insert(t).second) throw ValidationError("duplicate value token '" + t + "'");
  }
}

Universe Universe::of_size(std::size_t k) {
  std::vector<std::string> tokens;
  for (std::size_t v = 0; v < k; ++v) {
    tokens.push_back(v < 26 ? std::string(1, static_cast<char>('a' + v)) : "v" + std::to_string(v));
  }
  return Universe(std::move(tokens));
}

std::optional<ValueId> Universe::find(std::string_view token) const {
  for (ValueId v = 0; v < tokens_.size(); ++v)
    if (tokens_[v] == token) return v;
  return std::nullopt;
}

std::string Universe::format(ValueSet s) const {
  std::string out;
  for (auto v : s) {
    if (!out.empty()) out += ' ';
    out += token(v);
  }
  return out;
}

void SetInstance::validate() const {
  if (locals.size() > kMaxSetWidth) throw ValidationError("at most 64 agents are supported");
  for (std::size_t i = 0; i < locals.size(); ++i) {
    if (!locals[i].subset_of(universe.all())) {
      throw ValidationError("local set of agent " + std::to_string(i) + " leaves the universe");
    }
  }
}

SetInstance parse_instance_lines(const std::vector<text::Line>& lines) {
  std::optional<Universe> universe;
  std::size_t universe_line = 0;
  std::optional<std::size_t> f;
  struct Pending {
    std::size_t line;
    std::vector<std::string> tokens;
  };
  std::vector<std::optional<Pending>> agents;

  for (const auto& line : lines) {
    const auto& kw = line.tokens[0];
    if (kw == "universe") {
      if (universe) throw ParseError(line.number, "duplicate 'universe' line");
      try {
        universe = Universe(std::vector<std::string>(line.tokens.begin() + 1, line.tokens.end()));
      } catch (const ValidationError& e) {
        throw ParseError(line.number, e.what());
      }
      universe_line = line.number;
    } else if (kw == "f") {
      if (f) throw ParseError(line.number, "duplicate 'f' line");
      if (line.tokens.size() != 2) throw ParseError(line.number, "expected 'f <bound>'");
      f = text::parse_index(line, 1);
    } else if (kw == "agent") {
      if (line.tokens.size() < 2) throw ParseError(line.number, "expected 'agent <id>: values...'");
      std::string id = line.tokens[1];
      std::size_t first_value = 2;
      if (!id.empty() && id.back() == ':') {
        id.pop_back();
      } else if (line.tokens.size() > 2 && line.tokens[2] == ":") {
        first_value = 3;
      } else {
        throw ParseError(line.number, "expected ':' after agent id");
      }
      auto index = static_cast<std::size_t>(text::parse_u64(line, id));
      if (index >= kMaxSetWidth) throw ParseError(line.number, "agent id exceeds 63");
      if (agents.size() <= index) agents.resize(index + 1);
      if (agents[index]) throw ParseError(line.number, "duplicate agent " + id);
      agents[index] = Pending{line.number, {line.tokens.begin() + first_value, line.tokens.end()}};
    } else {
      throw ParseError(line.number, "unknown keyword '" + kw + "'");
    }
  }
  const std::size_t last = lines.empty() ? 1 : lines.back().number;
  if (!universe) throw ParseError(last, "missing 'universe' line");
  if (agents.empty()) throw ParseError(last, "no agents");

  SetInstance inst{*universe, {}, f.value_or(0)};
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (!agents[i]) throw ParseError(last, "agent " + std::to_string(i) + " missing; ids must be 0..n-1");
    ValueSet local;
    for (const auto& token : agents[i]->tokens) {
      auto v = universe->find(token);
      if (!v) throw ParseError(agents[i]->line, "value '" + token + "' not in universe (line " +
                                                   std::to_string(universe_line) + ")");
      local.insert(*v);
    }
    inst.locals.push_back(local);
  }
  return inst;
}

SetInstance parse_instance_text(std::string_view text) { return parse_instance_lines(text::tokenize(text)); }

std::string format_instance_text(const SetInstance& inst) {
  std::string out = "universe";
  for (const auto& t : inst.universe.tokens()) out += " " + t;
  out += "\nf " + std::to_string(inst.f) + "\n";
  for (std::size_t i = 0; i < inst.size(); ++i) {
    out += "agent " + std::to_string(i) + ":";
    if (!inst.locals[i].empty()) out += " " + inst.universe.format(inst.locals[i]);
    out += "\n";
  }
  return out;
}

ValueSet intersect_or_universe(const SetInstance& inst, AgentSet S) {
  ValueSet out = inst.universe.all();
  for (auto i : S) out &= inst.locals.at(i);
  return out;
}

ValueSet intersect(const SetInstance& inst, AgentSet S) {
  if (S.empty()) throw ValidationError("intersection over an empty agent set");
  if (!S.subset_of(inst.agents())) throw ValidationError("agent set exceeds the instance");
  return intersect_or_universe(inst, S);
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    if (r > std::numeric_limits<std::uint64_t>::max() / (n - i)) return std::numeric_limits<std::uint64_t>::max();
    r = r * (n - i) / (i + 1);
  }
  return r;
}

// Calls fn on every k-subset of {0..n-1} in increasing bitmask order.
template <typename Fn>
bool for_each_k_subset(std::size_t n, std::size_t k, Fn&& fn) {
  if (k > n) return true;
  if (k == 0) return fn(AgentSet{});
  const std::uint64_t limit = AgentSet::range(n).bits();
  std::uint64_t x = AgentSet::range(k).bits();
  while (true) {
    if (!fn(AgentSet(x))) return false;
    if (x == (limit & ~(limit >> k))) return true;  // highest k bits of the range
    const std::uint64_t c = x & (~x + 1);
    const std::uint64_t r = x + c;
    x = (((r ^ x) >> 2) / c) | r;
  }
}

RedundancyVerdict empty_global(const SetInstance& inst) {
  return {false, RedundancyWitness{WitnessKind::EmptyIntersection, std::nullopt, inst.agents(), 0, std::nullopt}};
}

}  // namespace

RedundancyVerdict check_property_b(const SetInstance& inst, const EnumerationBudget& budget) {
  inst.validate();
  const std::size_t n = inst.size();
  const ValueSet global = intersect_or_universe(inst, inst.agents());
  if (n == 0 || global.empty()) return empty_global(inst);
  const std::size_t smallest = n > 2 * inst.f ? n - 2 * inst.f : 0;

  std::uint64_t predicted = 0;
  for (std::size_t k = smallest; k <= n; ++k) {
    auto c = binomial_saturating(n, k);
    predicted = predicted > std::numeric_limits<std::uint64_t>::max() - c ? std::numeric_limits<std::uint64_t>::max()
                                                                          : predicted + c;
  }
  if (predicted > budget.max_items) throw BudgetExceeded(predicted, budget.max_items);

  RedundancyVerdict verdict;
  for (std::size_t k = n + 1; k-- > smallest;) {
    bool done = !for_each_k_subset(n, k, [&](AgentSet S) {
      ValueSet extra = intersect_or_universe(inst, S) - global;
      if (extra.empty()) return true;
      verdict = {false, RedundancyWitness{WitnessKind::Subset, extra.front(), S, 0, std::nullopt}};
      return false;
    });
    if (done) break;
  }
  return verdict;
}

RedundancyVerdict check_absence_threshold(const SetInstance& inst, std::size_t threshold) {
  inst.validate();
  const ValueSet global = intersect_or_universe(inst, inst.agents());
  if (inst.size() == 0 || global.empty()) return empty_global(inst);
  for (auto y : inst.universe.all() - global) {
    AgentSet lacking;
    for (std::size_t i = 0; i < inst.size(); ++i)
      if (!inst.locals[i].contains(y)) lacking.insert(i);
    if (lacking.size() < threshold) {
      return {false, RedundancyWitness{WitnessKind::Absence, y, lacking, threshold, std::nullopt}};
    }
  }
  return {};
}

RedundancyVerdict check_property_c(const SetInstance& inst) { return check_absence_threshold(inst, 2 * inst.f + 1); }

RedundancyVerdict check_3f_redundancy(const SetInstance& inst) {
  return check_absence_threshold(inst, 3 * inst.f + 1);
}

RedundancyVerdict check_property_d(const SetInstance& inst, const CommGraph& g, const EnumerationBudget& budget,
                                   SearchMethod method) {
  inst.validate();
  if (g.size() != inst.size()) throw ValidationError("graph and instance disagree on the number of agents");
  RedundancyVerdict verdict;
  auto offending = [&](AgentSet faulty, AgentSet component) {
    return intersect_or_universe(inst, component) - intersect_or_universe(inst, g.agents() - faulty);
  };
  if (method == SearchMethod::Candidates) {
    for_each_realizable_source(g, inst.f, budget, [&](const SourceCandidate& c) {
      ValueSet bad = offending(c.faulty, c.component);
      if (bad.empty()) return true;
      verdict = {false, RedundancyWitness{WitnessKind::SourceComponent, bad.front(), c.component, 0,
                                          realize_source(g, c)}};
      return false;
    });
  } else {
    for_each_source_exhaustive(g, inst.f, budget, [&](const ReducedGraph& r, AgentSet component) {
      ValueSet bad = offending(r.faulty(), component);
      if (bad.empty()) return true;
      verdict = {false, RedundancyWitness{WitnessKind::SourceComponent, bad.front(), component, 0, r}};
      return false;
    });
  }
  return verdict;
}

RedundancyVerdict check_equal_sets(const SetInstance& inst) {
  inst.validate();
  for (std::size_t j = 1; j < inst.size(); ++j) {
    ValueSet diff = (inst.locals[0] - inst.locals[j]) | (inst.locals[j] - inst.locals[0]);
    if (!diff.empty()) return {false, RedundancyWitness{WitnessKind::Unequal, diff.front(), {0, j}, 0, std::nullopt}};
  }
  return {};
}

bool equivalence_bc(const SetInstance& inst) {
  return check_property_b(inst, EnumerationBudget::unlimited()).holds == check_property_c(inst).holds;
}

bool confirms_violation(const SetInstance& inst, const RedundancyWitness& w, const CommGraph* g) {
  if (!w.agents.subset_of(inst.agents())) return false;
  const ValueSet global = intersect_or_universe(inst, inst.agents());
  switch (w.kind) {
    case WitnessKind::EmptyIntersection:
      return !w.agents.empty() && intersect_or_universe(inst, w.agents).empty();
    case WitnessKind::Subset: {
      if (!w.value) return false;
      const std::size_t n = inst.size();
      if (w.agents.size() + 2 * inst.f < n) return false;
      return intersect_or_universe(inst, w.agents).contains(*w.value) && !global.contains(*w.value);
    }
    case WitnessKind::Absence: {
      if (!w.value || global.contains(*w.value) || w.agents.size() >= w.threshold) return false;
      for (std::size_t i = 0; i < inst.size(); ++i)
        if (inst.locals[i].contains(*w.value) == w.agents.contains(i)) return false;
      return true;
    }
    case WitnessKind::SourceComponent: {
      if (!g || !w.value || !w.reduced || w.reduced->size() != g->size()) return false;
      const auto& r = *w.reduced;
      if (!r.valid_reduction(inst.f)) return false;
      std::vector<AgentSet> in(r.in_masks().begin(), r.in_masks().end());
      if (ReducedGraph(*g, r.faulty(), in) != r) return false;
      auto sources = source_components(r.decompose());
      if (std::find(sources.begin(), sources.end(), w.agents) == sources.end()) return false;
      return intersect_or_universe(inst, w.agents).contains(*w.value) &&
             !intersect_or_universe(inst, g->agents() - r.faulty()).contains(*w.value);
    }
    case WitnessKind::Unequal: {
      if (!w.value || w.agents.size() != 2) return false;
      auto v = w.agents.to_vector();
      return inst.locals[v[0]].contains(*w.value) != inst.locals[v[1]].contains(*w.value);
    }
  }
  return false;
}

// ---------------------------------------------------------------------------

namespace {

ValueSet random_core(Rng& rng, ValueSet universe, bool leave_outside) {
  auto values = universe.to_vector();
  ValueSet core;
  for (auto v : values)
    if (rng.chance(1, 3)) core.insert(v);
  if (core.empty()) core.insert(values[rng.below(values.size())]);
  if (leave_outside && core == universe && values.size() > 1) core.erase(core.to_vector()[rng.below(core.size())]);
  return core;
}

// Agents lacking value y must include exactly `lacking`; everyone else holds it.
void assign_absence(SetInstance& inst, ValueId y, AgentSet lacking) {
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (lacking.contains(i)) {
      inst.locals[i].erase(y);
    } else {
      inst.locals[i].insert(y);
    }
  }
}

bool value_satisfies_d(const SetInstance& inst, const std::vector<SourceCandidate>& candidates, ValueId y) {
  for (const auto& c : candidates) {
    if (!intersect_or_universe(inst, c.component).contains(y)) continue;
    if (!intersect_or_universe(inst, inst.agents() - c.faulty).contains(y)) return false;
  }
  return true;
}

}  // namespace

SetInstance generate_instance(std::size_t universe_size, std::size_t n, std::size_t f, const InstanceTarget& target,
                              std::uint64_t seed) {
  if (universe_size == 0 || n == 0) throw ValidationError("instances need at least one value and one agent");
  if (n > kMaxSetWidth) throw ValidationError("at most 64 agents are supported");
  Rng rng(hash_words({seed, universe_size, n, f, static_cast<std::uint64_t>(target.kind)}));
  SetInstance inst{Universe::of_size(universe_size), std::vector<ValueSet>(n), f};
  const AgentSet everyone = AgentSet::range(n);
  const ValueSet all = inst.universe.all();

  switch (target.kind) {
    case InstanceTarget::Kind::EqualSets: {
      ValueSet shared = rng.subset(all);
      if (shared.empty()) shared.insert(rng.below(universe_size));
      for (auto& local : inst.locals) local = shared;
      break;
    }
    case InstanceTarget::Kind::SatisfyC:
    case InstanceTarget::Kind::Satisfy3F: {
      const std::size_t need = (target.kind == InstanceTarget::Kind::SatisfyC ? 2 : 3) * f + 1;
      ValueSet core = need <= n ? random_core(rng, all, false) : all;
      for (auto& local : inst.locals) local = core;
      for (auto y : all - core) {
        auto k = rng.between(need, n);
        assign_absence(inst, y, rng.subset_of_size(everyone, k));
      }
      break;
    }
    case InstanceTarget::Kind::ViolateC: {
      if (f >= 1 && universe_size >= 2) {
        ValueSet core = random_core(rng, all, true);
        auto outside = (all - core).to_vector();
        ValueId violator = outside[rng.below(outside.size())];
        for (auto& local : inst.locals) local = core;
        for (auto y : outside) {
          std::size_t k = y == violator ? rng.between(1, std::min(2 * f, n)) : rng.between(1, n);
          assign_absence(inst, y, rng.subset_of_size(everyone, k));
        }
      } else {
        // Empty global intersection: every value is missing somewhere.
        for (auto y : all.to_vector()) assign_absence(inst, y, rng.subset_of_size(everyone, rng.between(1, n)));
      }
      break;
    }
    case InstanceTarget::Kind::SatisfyD: {
      if (!target.graph || target.graph->size() != n) throw ValidationError("satisfy_d needs a graph with n agents");
      std::vector<SourceCandidate> candidates;
      for_each_realizable_source(*target.graph, f, EnumerationBudget::from_env(), [&](const SourceCandidate& c) {
        if (c.faulty != everyone) candidates.push_back(c);
        return true;
      });
      ValueSet core = random_core(rng, all, false);
      for (auto& local : inst.locals) local = core;
      for (auto y : all - core) {
        bool placed = false;
        for (int attempt = 0; attempt < 16 && !placed; ++attempt) {
          assign_absence(inst, y, rng.subset_of_size(everyone, rng.between(1, n)));
          placed = value_satisfies_d(inst, candidates, y);
        }
        if (!placed) assign_absence(inst, y, everyone);
      }
      break;
    }
  }
  return inst;
}

}  // namespace byzset

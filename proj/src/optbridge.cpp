#include "byzset/optbridge.hpp"

#include <algorithm>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>

#include "byzset/error.hpp"
#include "byzset/random.hpp"

namespace byzset {

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("zero denominator");
  if (den < 0) num = -num, den = -den;
  auto g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

Rational operator+(Rational a, Rational b) {
  return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator*(Rational a, Rational b) { return Rational(a.num_ * b.num_, a.den_ * b.den_); }

std::strong_ordering operator<=>(Rational a, Rational b) { return a.num_ * b.den_ <=> b.num_ * a.den_; }

std::string Rational::str() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

// ---------------------------------------------------------------------------

GridDomain::GridDomain(Point lo_, Point hi_) : lo(lo_), hi(hi_) {
  if (hi < lo) throw ValidationError("empty grid domain");
}

PointSet GridDomain::all() const {
  PointSet out;
  for (Point x = lo; x <= hi; ++x) out.insert(x);
  return out;
}

CostFunction::CostFunction(const GridDomain& domain, PointSet argmin) : lo_(domain.lo), argmin_(std::move(argmin)) {
  if (argmin_.empty()) throw ValidationError("a cost function needs a nonempty argmin set");
  for (auto x : argmin_)
    if (!domain.contains(x)) throw ValidationError("argmin point " + std::to_string(x) + " is off the grid");
  values_.reserve(domain.size());
  for (Point x = domain.lo; x <= domain.hi; ++x) {
    auto above = argmin_.lower_bound(x);
    std::int64_t d = std::numeric_limits<std::int64_t>::max();
    if (above != argmin_.end()) d = *above - x;
    if (above != argmin_.begin()) d = std::min(d, x - *std::prev(above));
    values_.emplace_back(d * d);
  }
}

// ---------------------------------------------------------------------------

namespace {

Point parse_point(const text::Line& line, const std::string& token) { return text::parse_i64(line, token); }

GridDomain parse_domain(const text::Line& line) {
  if (line.tokens.size() != 2) throw ParseError(line.number, "expected 'domain <lo>..<hi>'");
  const auto& spec = line.tokens[1];
  auto dots = spec.find("..");
  if (dots == std::string::npos) throw ParseError(line.number, "expected 'domain <lo>..<hi>'");
  Point lo = parse_point(line, spec.substr(0, dots));
  Point hi = parse_point(line, spec.substr(dots + 2));
  if (hi < lo) throw ParseError(line.number, "empty domain");
  if (hi - lo >= 1'000'000) throw ParseError(line.number, "domain too large");
  return GridDomain(lo, hi);
}

}  // namespace

CostProfile parse_profile_lines(const std::vector<text::Line>& lines) {
  std::optional<GridDomain> domain;
  std::size_t f = 0;
  std::map<std::size_t, std::pair<std::size_t, PointSet>> agents;  // id -> (line, argmin)
  for (const auto& line : lines) {
    const auto& key = line.tokens[0];
    if (key == "domain") {
      if (domain) throw ParseError(line.number, "duplicate 'domain'");
      domain = parse_domain(line);
    } else if (key == "f") {
      if (line.tokens.size() != 2) throw ParseError(line.number, "expected 'f <k>'");
      f = text::parse_index(line, 1);
    } else if (key == "agent") {
      if (!domain) throw ParseError(line.number, "'agent' before 'domain'");
      if (line.tokens.size() < 3 || line.tokens[2] != "argmin:") {
        throw ParseError(line.number, "expected 'agent <id> argmin: <points>'");
      }
      auto id = text::parse_index(line, 1);
      if (agents.count(id)) throw ParseError(line.number, "duplicate agent " + std::to_string(id));
      PointSet pts;
      for (std::size_t k = 3; k < line.tokens.size(); ++k) {
        Point x = parse_point(line, line.tokens[k]);
        if (!domain->contains(x)) throw ParseError(line.number, "point " + line.tokens[k] + " is off the grid");
        pts.insert(x);
      }
      if (pts.empty()) throw ParseError(line.number, "empty argmin set");
      agents[id] = {line.number, std::move(pts)};
    } else {
      throw ParseError(line.number, "unknown keyword '" + key + "'");
    }
  }
  if (!domain) throw ParseError(lines.empty() ? 1 : lines.back().number, "missing 'domain'");
  CostProfile p{*domain, {}, f};
  for (const auto& [id, entry] : agents) {
    if (id != p.costs.size()) throw ParseError(entry.first, "agent ids must be 0..n-1");
    p.costs.emplace_back(*domain, entry.second);
  }
  if (p.costs.size() > kMaxSetWidth) throw ValidationError("at most 64 agents are supported");
  return p;
}

CostProfile parse_profile_text(std::string_view text) { return parse_profile_lines(text::tokenize(text)); }

std::string format_profile_text(const CostProfile& p) {
  std::string out = "domain " + std::to_string(p.domain.lo) + ".." + std::to_string(p.domain.hi) + "\n";
  out += "f " + std::to_string(p.f) + "\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    out += "agent " + std::to_string(i) + " argmin:";
    for (auto x : p.costs[i].argmin_set()) out += " " + std::to_string(x);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// The empty sum is zero everywhere, so the empty S minimizes to the domain.
PointSet argmin_of_sum(const CostProfile& p, AgentSet S) {
  PointSet best;
  std::optional<Rational> low;
  for (Point x = p.domain.lo; x <= p.domain.hi; ++x) {
    Rational sum;
    for (auto i : S) sum = sum + p.costs[i].at(x);
    if (!low || sum < *low) {
      low = sum;
      best.clear();
    }
    if (sum == *low) best.insert(x);
  }
  return best;
}

void check_agents(const CostProfile& p, AgentSet S) {
  if (!S.subset_of(p.agents())) throw ValidationError("subset names agents outside the profile");
}

}  // namespace

PointSet aggregate_argmin(const CostProfile& p, AgentSet S) {
  if (S.empty()) throw ValidationError("aggregate argmin over an empty set of agents");
  check_agents(p, S);
  return argmin_of_sum(p, S);
}

PointSet argmin_intersection(const CostProfile& p, AgentSet S) {
  check_agents(p, S);
  PointSet out = p.domain.all();
  for (auto i : S) {
    PointSet keep;
    std::set_intersection(out.begin(), out.end(), p.costs[i].argmin_set().begin(), p.costs[i].argmin_set().end(),
                          std::inserter(keep, keep.end()));
    out.swap(keep);
  }
  return out;
}

bool check_lemma1(const CostProfile& p, AgentSet S) {
  auto common = argmin_intersection(p, S);
  if (S.empty() || common.empty()) throw LemmaPrecondition("argmin sets over S have an empty intersection");
  return aggregate_argmin(p, S) == common;
}

ProfileVerdict check_property_a(const CostProfile& p, const EnumerationBudget& budget) {
  const std::size_t n = p.size();
  if (n == 0 || argmin_intersection(p, p.agents()).empty()) {
    return {false, ProfileWitness{p.agents(), {}, {}, {}}};
  }
  if (n < 64 && (std::uint64_t{1} << n) > budget.max_items) throw BudgetExceeded(std::uint64_t{1} << n, budget.max_items);
  const std::size_t smallest = n > 2 * p.f ? n - 2 * p.f : 0;
  const PointSet expected = argmin_of_sum(p, p.agents());

  std::vector<AgentSet> subsets;
  for_each_subset(p.agents(), [&](AgentSet S) {
    if (S.size() >= smallest) subsets.push_back(S);
  });
  std::stable_sort(subsets.begin(), subsets.end(), [](AgentSet x, AgentSet y) { return x.size() > y.size(); });
  for (auto S : subsets) {
    auto got = argmin_of_sum(p, S);
    if (got != expected) return {false, ProfileWitness{S, {}, got, expected}};
  }
  return {};
}

ProfileVerdict check_property_e(const CostProfile& p, const CommGraph& g, const EnumerationBudget& budget) {
  if (g.size() != p.size()) throw ValidationError("graph and profile disagree on the number of agents");
  ProfileVerdict verdict;
  for_each_realizable_source(g, p.f, budget, [&](const SourceCandidate& c) {
    if (c.faulty == g.agents()) return true;
    auto got = argmin_of_sum(p, c.component);
    auto expected = argmin_of_sum(p, g.agents() - c.faulty);
    if (got == expected) return true;
    verdict = {false, ProfileWitness{c.component, c.faulty, got, expected}};
    return false;
  });
  return verdict;
}

// ---------------------------------------------------------------------------

SetInstance lift_to_instance(const CostProfile& p) {
  if (p.domain.size() > kMaxSetWidth) throw ValidationError("lifting needs a grid of at most 64 points");
  std::vector<std::string> tokens;
  for (Point x = p.domain.lo; x <= p.domain.hi; ++x) tokens.push_back(std::to_string(x));
  SetInstance inst{Universe(tokens), {}, p.f};
  for (const auto& q : p.costs) {
    ValueSet s;
    for (auto x : q.argmin_set()) s.insert(static_cast<ValueId>(x - p.domain.lo));
    inst.locals.push_back(s);
  }
  return inst;
}

CostProfile lift_to_profile(const SetInstance& inst) {
  GridDomain domain(0, static_cast<Point>(inst.universe.size()) - 1);
  CostProfile p{domain, {}, inst.f};
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (inst.locals[i].empty()) throw ValidationError("agent " + std::to_string(i) + " has an empty set");
    PointSet pts;
    for (auto v : inst.locals[i]) pts.insert(static_cast<Point>(v));
    p.costs.emplace_back(domain, std::move(pts));
  }
  return p;
}

CostProfile generate_profile(Point K, std::size_t n, std::size_t f, const InstanceTarget& target, std::uint64_t seed) {
  if (K < 0 || K >= 64) throw ValidationError("generated grids span 0..K with K < 64");
  auto inst = generate_instance(static_cast<std::size_t>(K) + 1, n, f, target, seed);
  // Adding one point to every set leaves every subset comparison unchanged.
  if (intersect_or_universe(inst, inst.agents()).empty()) {
    Rng rng(hash_words({seed, 0x0b7b1d6eULL}));
    ValueId common = rng.below(inst.universe.size());
    for (auto& local : inst.locals) local.insert(common);
  }
  return lift_to_profile(inst);
}

OptimizationRun solve_byz_opt(const CommGraph& g, const CostProfile& p, AgentSet faulty,
                              const AdversaryStrategy& adversary) {
  auto inst = lift_to_instance(p);
  OptimizationRun run;
  run.execution = run_constrained(g, inst, faulty, adversary);
  run.converged = run.execution.outcome.converged;
  run.outputs.assign(p.size(), std::nullopt);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& decided = run.execution.outcome.decided[i];
    if (decided && !decided->empty()) run.outputs[i] = p.domain.at(decided->front());
  }
  return run;
}

}  // namespace byzset

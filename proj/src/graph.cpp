#include "byzset/graph.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <set>
#include <sstream>

#include "byzset/error.hpp"
#include "byzset/text.hpp"

namespace byzset {

CommGraph::CommGraph(std::size_t n, std::span<const Edge> edges) : in_(n), out_(n) {
  if (n > kMaxSetWidth) throw GraphError("at most 64 agents are supported, got " + std::to_string(n));
  for (const auto& e : edges) {
    if (e.from >= n || e.to >= n) {
      throw GraphError("edge (" + std::to_string(e.from) + "," + std::to_string(e.to) + ") out of range for n=" +
                       std::to_string(n));
    }
    if (e.from == e.to) throw GraphError("self-loop at agent " + std::to_string(e.from));
    in_[e.to].insert(e.from);
    out_[e.from].insert(e.to);
  }
}

AgentSet CommGraph::in_neighbors(AgentId i) const {
  if (i >= size()) throw GraphError("agent " + std::to_string(i) + " not in graph");
  return in_[i];
}

AgentSet CommGraph::out_neighbors(AgentId i) const {
  if (i >= size()) throw GraphError("agent " + std::to_string(i) + " not in graph");
  return out_[i];
}

bool CommGraph::has_edge(AgentId from, AgentId to) const { return to < size() && in_[to].contains(from); }

std::size_t CommGraph::edge_count() const {
  std::size_t total = 0;
  for (auto s : in_) total += s.size();
  return total;
}

std::vector<Edge> CommGraph::edges() const {
  std::vector<Edge> out;
  for (AgentId i = 0; i < size(); ++i) {
    for (auto j : out_[i]) out.push_back({i, j});
  }
  return out;
}

CommGraph CommGraph::complete(std::size_t n) {
  std::vector<Edge> edges;
  for (AgentId i = 0; i < n; ++i)
    for (AgentId j = 0; j < n; ++j)
      if (i != j) edges.push_back({i, j});
  return CommGraph(n, edges);
}

CommGraph CommGraph::cycle(std::size_t n) {
  std::vector<Edge> edges;
  for (AgentId i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return CommGraph(n, edges);
}

CommGraph build_graph(std::size_t n, std::span<const Edge> edges) { return CommGraph(n, edges); }

AgentSet incoming_neighbors(const CommGraph& g, AgentId i) { return g.in_neighbors(i); }

GraphFile parse_graph_text(std::string_view text) { return parse_graph_lines(text::tokenize(text)); }

GraphFile parse_graph_lines(const std::vector<text::Line>& lines) {
  std::optional<std::size_t> n;
  std::size_t f = 0;
  std::vector<Edge> edges;
  std::size_t header_line = 0;
  for (const auto& line : lines) {
    const auto& kw = line.tokens[0];
    if (kw == "n") {
      if (n) throw ParseError(line.number, "duplicate 'n' line");
      n = text::parse_index(line, 1);
      header_line = line.number;
      if (line.tokens.size() == 4 && line.tokens[2] == "f") {
        f = text::parse_index(line, 3);
      } else if (line.tokens.size() != 2) {
        throw ParseError(line.number, "expected 'n <count> f <bound>'");
      }
    } else if (kw == "edge") {
      if (!n) throw ParseError(line.number, "'edge' before 'n' line");
      if (line.tokens.size() != 3) throw ParseError(line.number, "expected 'edge <src> <dst>'");
      Edge e{text::parse_index(line, 1), text::parse_index(line, 2)};
      if (e.from >= *n || e.to >= *n) throw ParseError(line.number, "edge endpoint out of range");
      if (e.from == e.to) throw ParseError(line.number, "self-loop");
      edges.push_back(e);
    } else {
      throw ParseError(line.number, "unknown keyword '" + kw + "'");
    }
  }
  if (!n) throw ParseError(lines.empty() ? 1 : lines.back().number, "missing 'n <count> f <bound>' line");
  try {
    return GraphFile{CommGraph(*n, edges), f};
  } catch (const GraphError& e) {
    throw ParseError(header_line, e.what());
  }
}

std::string format_graph_text(const CommGraph& g, std::size_t f) {
  std::ostringstream out;
  out << "n " << g.size() << " f " << f << "\n";
  for (const auto& e : g.edges()) out << "edge " << e.from << " " << e.to << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------

namespace {

class Tarjan {
 public:
  Tarjan(AgentSet nodes, std::span<const AgentSet> in_masks) : nodes_(nodes), out_(in_masks.size()) {
    for (auto i : nodes) {
      for (auto j : in_masks[i] & nodes) out_[j].insert(i);
    }
    index_.assign(in_masks.size(), -1);
    low_.assign(in_masks.size(), 0);
    for (auto v : nodes) {
      if (index_[v] < 0) visit(v);
    }
  }

  std::vector<AgentSet> take() { return std::move(components_); }

 private:
  void visit(AgentId v) {
    index_[v] = low_[v] = counter_++;
    stack_.push_back(v);
    on_stack_.insert(v);
    for (auto w : out_[v]) {
      if (index_[w] < 0) {
        visit(w);
        low_[v] = std::min(low_[v], low_[w]);
      } else if (on_stack_.contains(w)) {
        low_[v] = std::min(low_[v], index_[w]);
      }
    }
    if (low_[v] == index_[v]) {
      AgentSet component;
      AgentId w;
      do {
        w = stack_.back();
        stack_.pop_back();
        on_stack_.erase(w);
        component.insert(w);
      } while (w != v);
      components_.push_back(component);
    }
  }

  AgentSet nodes_;
  std::vector<AgentSet> out_;
  std::vector<int> index_;
  std::vector<int> low_;
  std::vector<AgentId> stack_;
  AgentSet on_stack_;
  int counter_ = 0;
  std::vector<AgentSet> components_;
};

}  // namespace

Decomposition decompose_scc(AgentSet nodes, std::span<const AgentSet> in_masks) {
  Decomposition d;
  d.components = Tarjan(nodes, in_masks).take();
  std::sort(d.components.begin(), d.components.end(),
            [](AgentSet a, AgentSet b) { return a.front() < b.front(); });

  std::vector<std::size_t> owner(in_masks.size(), 0);
  for (std::size_t k = 0; k < d.components.size(); ++k)
    for (auto v : d.components[k]) owner[v] = k;

  std::set<std::pair<std::size_t, std::size_t>> crossings;
  for (auto i : nodes) {
    for (auto j : in_masks[i] & nodes) {
      if (owner[j] != owner[i]) crossings.emplace(owner[j], owner[i]);
    }
  }
  d.dag_edges.assign(crossings.begin(), crossings.end());
  return d;
}

Decomposition decompose_scc(const CommGraph& g) { return decompose_scc(g.agents(), g.in_masks()); }

std::vector<AgentSet> source_components(const Decomposition& d) {
  std::vector<bool> has_incoming(d.components.size(), false);
  for (const auto& [from, to] : d.dag_edges) has_incoming[to] = true;
  std::vector<AgentSet> out;
  for (std::size_t k = 0; k < d.components.size(); ++k)
    if (!has_incoming[k]) out.push_back(d.components[k]);
  return out;
}

AgentSet reachable_from(AgentId start, AgentSet nodes, std::span<const AgentSet> in_masks) {
  // Forward reachability using in-masks: w is a successor of v iff v in in[w].
  AgentSet seen = AgentSet::single(start);
  AgentSet frontier = seen;
  while (!frontier.empty()) {
    AgentSet next;
    for (auto w : nodes - seen) {
      if (in_masks[w].intersects(frontier)) next.insert(w);
    }
    seen |= next;
    frontier = next;
  }
  return seen;
}

bool strongly_connected(AgentSet nodes, std::span<const AgentSet> in_masks) {
  if (nodes.empty()) return false;
  const AgentId root = nodes.front();
  if (reachable_from(root, nodes, in_masks) != nodes) return false;
  // Backward: v reaches root iff root is forward-reachable in the reversed graph.
  AgentSet seen = AgentSet::single(root);
  AgentSet frontier = seen;
  while (!frontier.empty()) {
    AgentSet next;
    for (auto w : frontier) next |= (in_masks[w] & nodes) - seen;
    seen |= next;
    frontier = next;
  }
  return seen == nodes;
}

// ---------------------------------------------------------------------------

ReducedGraph::ReducedGraph(const CommGraph& base, AgentSet faulty, std::vector<AgentSet> surviving_in)
    : base_in_(base.size()), faulty_(faulty), in_(std::move(surviving_in)) {
  const AgentSet survivors = base.agents() - faulty;
  for (AgentId i = 0; i < base.size(); ++i) {
    base_in_[i] = survivors.contains(i) ? (base.in_neighbors(i) & survivors) : AgentSet{};
  }
  if (in_.size() != base.size()) throw GraphError("reduced graph must cover the base agent range");
}

std::vector<Edge> ReducedGraph::edges() const {
  std::vector<Edge> out;
  for (AgentId i = 0; i < size(); ++i)
    for (auto j : in_[i]) out.push_back({j, i});
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Edge> ReducedGraph::removed_edges() const {
  std::vector<Edge> out;
  for (AgentId i = 0; i < size(); ++i)
    for (auto j : base_in_[i] - in_[i]) out.push_back({j, i});
  std::sort(out.begin(), out.end());
  return out;
}

bool ReducedGraph::valid_reduction(std::size_t f) const {
  if (faulty_.size() > f) return false;
  for (AgentId i = 0; i < size(); ++i) {
    if (faulty_.contains(i)) {
      if (!in_[i].empty()) return false;
      continue;
    }
    if (!in_[i].subset_of(base_in_[i])) return false;
    if ((base_in_[i] - in_[i]).size() > f) return false;
  }
  return true;
}

EnumerationBudget EnumerationBudget::from_env() {
  EnumerationBudget b;
  if (const char* raw = std::getenv("BYZSET_BUDGET")) {
    char* end = nullptr;
    auto value = std::strtoull(raw, &end, 10);
    if (end != raw && *end == '\0') b.max_items = value;
  }
  return b;
}

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return b > std::numeric_limits<std::uint64_t>::max() - a ? std::numeric_limits<std::uint64_t>::max() : a + b;
}

std::vector<AgentSet> restricted_in(const CommGraph& g, AgentSet faulty) {
  const AgentSet survivors = g.agents() - faulty;
  std::vector<AgentSet> in(g.size());
  for (auto i : survivors) in[i] = g.in_neighbors(i) & survivors;
  return in;
}

}  // namespace

std::uint64_t count_reduced_graphs(const CommGraph& g, AgentSet faulty, std::size_t f) {
  auto in = restricted_in(g, faulty);
  std::uint64_t total = 1;
  for (auto i : g.agents() - faulty) {
    const std::uint64_t d = in[i].size();
    std::uint64_t choices = 0;
    std::uint64_t binom = 1;  // C(d, k)
    for (std::uint64_t k = 0; k <= std::min<std::uint64_t>(f, d); ++k) {
      choices += binom;
      binom = binom * (d - k) / (k + 1);
    }
    total = saturating_mul(total, choices);
  }
  return total;
}

ReducedGraphStream::ReducedGraphStream(const CommGraph& g, AgentSet faulty, std::size_t f)
    : graph_(&g), faulty_(faulty), surviving_in_(restricted_in(g, faulty)) {
  if (faulty.size() > f) throw ValidationError("|F| exceeds f");
  if (!faulty.subset_of(g.agents())) throw ValidationError("F contains agents outside the graph");
  removals_.resize(g.size());
  for (auto i : g.agents() - faulty) {
    for_each_subset(surviving_in_[i], [&](AgentSet s) {
      if (s.size() <= f) removals_[i].push_back(s);
    });
  }
  cursor_.assign(g.size(), 0);
}

std::optional<ReducedGraph> ReducedGraphStream::next() {
  if (done_) return std::nullopt;
  std::vector<AgentSet> in(graph_->size());
  for (auto i : graph_->agents() - faulty_) in[i] = surviving_in_[i] - removals_[i][cursor_[i]];
  ReducedGraph current(*graph_, faulty_, std::move(in));

  // Advance the odometer; the highest survivor index is the fastest digit.
  done_ = true;
  for (std::size_t k = graph_->size(); k-- > 0;) {
    if (faulty_.contains(k)) continue;
    if (++cursor_[k] < removals_[k].size()) {
      done_ = false;
      break;
    }
    cursor_[k] = 0;
  }
  return current;
}

ReducedGraphStream enumerate_reduced_graphs(const CommGraph& g, AgentSet faulty, std::size_t f) {
  return ReducedGraphStream(g, faulty, f);
}

std::vector<AgentSet> fault_placements(std::size_t n, std::size_t f) {
  std::vector<AgentSet> out;
  for_each_subset(AgentSet::range(n), [&](AgentSet s) {
    if (s.size() <= f) out.push_back(s);
  });
  std::stable_sort(out.begin(), out.end(), [](AgentSet a, AgentSet b) { return a.size() < b.size(); });
  return out;
}

// ---------------------------------------------------------------------------

bool is_realizable_source(const CommGraph& g, std::size_t f, AgentSet faulty, AgentSet component) {
  if (component.empty() || component.intersects(faulty) || faulty.size() > f) return false;
  const AgentSet outside = g.agents() - faulty - component;
  for (auto i : component) {
    if ((g.in_neighbors(i) & outside).size() > f) return false;
  }
  return strongly_connected(component, g.in_masks());
}

ReducedGraph realize_source(const CommGraph& g, const SourceCandidate& candidate) {
  auto in = restricted_in(g, candidate.faulty);
  for (auto i : candidate.component) in[i] &= candidate.component;
  return ReducedGraph(g, candidate.faulty, std::move(in));
}

bool for_each_realizable_source(const CommGraph& g, std::size_t f, const EnumerationBudget& budget,
                                const SourceVisitor& visit) {
  const auto placements = fault_placements(g.size(), f);
  std::uint64_t predicted = 0;
  for (auto faulty : placements) {
    predicted = saturating_add(predicted, std::uint64_t{1} << std::min<std::size_t>(63, g.size() - faulty.size()));
  }
  if (predicted > budget.max_items) throw BudgetExceeded(predicted, budget.max_items);

  for (auto faulty : placements) {
    const AgentSet survivors = g.agents() - faulty;
    bool keep_going = for_each_subset(survivors, [&](AgentSet component) {
      if (!is_realizable_source(g, f, faulty, component)) return true;
      return visit(SourceCandidate{faulty, component});
    });
    if (!keep_going) return false;
  }
  return true;
}

bool for_each_source_exhaustive(const CommGraph& g, std::size_t f, const EnumerationBudget& budget,
                                const std::function<bool(const ReducedGraph&, AgentSet)>& visit) {
  const auto placements = fault_placements(g.size(), f);
  std::uint64_t predicted = 0;
  for (auto faulty : placements) predicted = saturating_add(predicted, count_reduced_graphs(g, faulty, f));
  if (predicted > budget.max_items) throw BudgetExceeded(predicted, budget.max_items);

  for (auto faulty : placements) {
    auto stream = enumerate_reduced_graphs(g, faulty, f);
    while (auto reduced = stream.next()) {
      for (auto component : source_components(reduced->decompose())) {
        if (!visit(*reduced, component)) return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

bool for_each_partition(std::size_t n, std::size_t f, const std::function<bool(const Partition&)>& visit) {
  for (auto faulty : fault_placements(n, f)) {
    const AgentSet survivors = AgentSet::range(n) - faulty;
    bool keep_going = for_each_subset(survivors, [&](AgentSet left) {
      return visit(Partition{left, survivors - left, faulty});
    });
    if (!keep_going) return false;
  }
  return true;
}

std::vector<Partition> enumerate_partitions(const CommGraph& g, std::size_t f) {
  std::vector<Partition> out;
  for_each_partition(g.size(), f, [&](const Partition& p) {
    out.push_back(p);
    return true;
  });
  return out;
}

}  // namespace byzset

#include "byzset/conditions.hpp"

#include <algorithm>
#include <deque>

#include "byzset/error.hpp"

namespace byzset {

namespace {

// The clause "some i in `side` has >= threshold in-neighbors in `other`",
// required only when |other| >= threshold and `side` is nonempty.
bool clause_holds(const CommGraph& g, AgentSet side, AgentSet other, std::size_t threshold) {
  if (side.empty() || other.size() < threshold) return true;
  for (auto i : side) {
    if ((g.in_neighbors(i) & other).size() >= threshold) return true;
  }
  return false;
}

}  // namespace

ConditionVerdict check_partition_threshold(const CommGraph& g, std::size_t f, std::size_t threshold) {
  ConditionVerdict verdict;
  for_each_partition(g.size(), f, [&](const Partition& p) {
    if (!clause_holds(g, p.left, p.right, threshold)) {
      verdict = {false, PartitionWitness{p, threshold, true}};
      return false;
    }
    if (!clause_holds(g, p.right, p.left, threshold)) {
      verdict = {false, PartitionWitness{p, threshold, false}};
      return false;
    }
    return true;
  });
  return verdict;
}

bool partition_violates(const CommGraph& g, const PartitionWitness& w) {
  const auto& p = w.partition;
  if ((p.left | p.right | p.faulty) != g.agents()) return false;
  if (p.left.intersects(p.right) || p.left.intersects(p.faulty) || p.right.intersects(p.faulty)) return false;
  return w.left_clause ? !clause_holds(g, p.left, p.right, w.threshold)
                       : !clause_holds(g, p.right, p.left, w.threshold);
}

ConditionVerdict check_condition_a(const CommGraph& g, std::size_t f) {
  return check_partition_threshold(g, f, f + 1);
}

ConditionVerdict check_condition_async(const CommGraph& g, std::size_t f) {
  return check_partition_threshold(g, f, 2 * f + 1);
}

ConditionVerdict check_condition_b(const CommGraph& g, std::size_t f, const EnumerationBudget& budget,
                                   SearchMethod method) {
  const std::size_t n = g.size();
  ConditionVerdict verdict;
  if (n <= 2 * f) return verdict;  // n - 2f <= 0: nothing can be too small
  const std::size_t minimum = n - 2 * f;

  if (method == SearchMethod::Candidates) {
    for_each_realizable_source(g, f, budget, [&](const SourceCandidate& c) {
      if (c.component.size() >= minimum) return true;
      verdict = {false, SourceWitness{realize_source(g, c), c.component}};
      return false;
    });
  } else {
    for_each_source_exhaustive(g, f, budget, [&](const ReducedGraph& r, AgentSet component) {
      if (component.size() >= minimum) return true;
      verdict = {false, SourceWitness{r, component}};
      return false;
    });
  }
  return verdict;
}

bool violates_condition_b(const CommGraph& g, std::size_t f, const SourceWitness& w) {
  if (w.reduced.size() != g.size() || !w.reduced.valid_reduction(f)) return false;
  if (ReducedGraph(g, w.reduced.faulty(), std::vector<AgentSet>(w.reduced.in_masks().begin(),
                                                                 w.reduced.in_masks().end())) != w.reduced) {
    return false;  // derived from a different base graph
  }
  auto sources = source_components(w.reduced.decompose());
  if (std::find(sources.begin(), sources.end(), w.component) == sources.end()) return false;
  return g.size() > 2 * f && w.component.size() < g.size() - 2 * f;
}

bool single_source_check(const CommGraph& g, std::size_t f, const EnumerationBudget& budget) {
  // Two disjoint realizable candidates for the same F can be made sources of
  // one reduced graph at once (each only loses links entering it from outside).
  std::vector<AgentSet> current;
  AgentSet current_faulty;
  bool first = true;
  bool single = true;
  for_each_realizable_source(g, f, budget, [&](const SourceCandidate& c) {
    if (first || c.faulty != current_faulty) {
      current.clear();
      current_faulty = c.faulty;
      first = false;
    }
    for (auto other : current) {
      if (!other.intersects(c.component)) {
        single = false;
        return false;
      }
    }
    current.push_back(c.component);
    return true;
  });
  return single;
}

// ---------------------------------------------------------------------------

namespace {

// Node-split unit-capacity network: v_in = 2v, v_out = 2v + 1.
class SplitNetwork {
 public:
  SplitNetwork(const CommGraph& g, AgentId x, AgentId y) : n_(g.size()), size_(2 * n_), cap_(size_ * size_, 0) {
    constexpr int kUnbounded = 1 << 20;
    for (AgentId v = 0; v < n_; ++v) cap(in(v), out(v)) = (v == x || v == y) ? kUnbounded : 1;
    for (const auto& e : g.edges()) {
      if (e.to == x || e.from == y) continue;
      // Only node arcs may be cut; the direct x -> y link counts as one path.
      cap(out(e.from), in(e.to)) = (e.from == x && e.to == y) ? 1 : kUnbounded;
    }
    original_ = cap_;
    source_ = out(x);
    sink_ = in(y);
  }

  /// Augments until `limit` units flow or no augmenting path remains.
  std::size_t run(std::size_t limit) {
    std::size_t flow = 0;
    while (flow < limit) {
      std::vector<int> parent(size_, -1);
      parent[source_] = static_cast<int>(source_);
      std::deque<std::size_t> queue{source_};
      while (!queue.empty() && parent[sink_] < 0) {
        auto u = queue.front();
        queue.pop_front();
        for (std::size_t v = 0; v < size_; ++v) {
          if (parent[v] < 0 && cap(u, v) > 0) {
            parent[v] = static_cast<int>(u);
            queue.push_back(v);
          }
        }
      }
      if (parent[sink_] < 0) break;
      for (auto v = sink_; v != source_;) {
        auto u = static_cast<std::size_t>(parent[v]);
        --cap(u, v);
        ++cap(v, u);
        v = u;
      }
      ++flow;
    }
    return flow;
  }

  /// Residual-reachable side of the source after `run`.
  std::vector<bool> source_side() const {
    std::vector<bool> seen(size_, false);
    seen[source_] = true;
    std::deque<std::size_t> queue{source_};
    while (!queue.empty()) {
      auto u = queue.front();
      queue.pop_front();
      for (std::size_t v = 0; v < size_; ++v) {
        if (!seen[v] && cap(u, v) > 0) {
          seen[v] = true;
          queue.push_back(v);
        }
      }
    }
    return seen;
  }

  /// Edges u -> v of the original graph that carry one unit of flow.
  bool carries(AgentId u, AgentId v) const {
    auto a = out(u), b = in(v);
    return original_[a * size_ + b] > cap_[a * size_ + b];
  }

  static std::size_t in(AgentId v) { return 2 * v; }
  static std::size_t out(AgentId v) { return 2 * v + 1; }

 private:
  int& cap(std::size_t u, std::size_t v) { return cap_[u * size_ + v]; }
  int cap(std::size_t u, std::size_t v) const { return cap_[u * size_ + v]; }

  std::size_t n_;
  std::size_t size_;
  std::vector<int> cap_;
  std::vector<int> original_;
  std::size_t source_ = 0;
  std::size_t sink_ = 0;
};

void check_pair(const CommGraph& g, AgentId x, AgentId y) {
  if (x >= g.size() || y >= g.size()) throw GraphError("agent out of range");
  if (x == y) throw GraphError("disjoint paths need distinct endpoints");
}

}  // namespace

std::size_t max_disjoint_paths(const CommGraph& g, AgentId x, AgentId y) {
  check_pair(g, x, y);
  SplitNetwork net(g, x, y);
  return net.run(g.size());
}

DisjointPathSet disjoint_paths(const CommGraph& g, AgentId x, AgentId y, std::size_t k) {
  check_pair(g, x, y);
  SplitNetwork net(g, x, y);
  const std::size_t flow = net.run(k);
  DisjointPathSet result{x, y, {}};
  for (auto first : g.out_neighbors(x)) {
    if (!net.carries(x, first)) continue;
    std::vector<AgentId> path{x, first};
    while (path.back() != y) {
      auto at = path.back();
      AgentId next = at;
      for (auto w : g.out_neighbors(at)) {
        if (net.carries(at, w)) {
          next = w;
          break;
        }
      }
      if (next == at) throw std::logic_error("broken flow decomposition");
      path.push_back(next);
    }
    result.paths.push_back(std::move(path));
  }
  if (result.paths.size() != flow) throw std::logic_error("flow decomposition size mismatch");
  std::sort(result.paths.begin(), result.paths.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return result;
}

bool valid_disjoint_paths(const CommGraph& g, const DisjointPathSet& s) {
  AgentSet used;
  for (const auto& path : s.paths) {
    if (path.size() < 2 || path.front() != s.source || path.back() != s.sink) return false;
    AgentSet inner;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      if (!g.has_edge(path[k], path[k + 1])) return false;
    }
    for (std::size_t k = 1; k + 1 < path.size(); ++k) {
      if (path[k] == s.source || path[k] == s.sink || inner.contains(path[k])) return false;
      inner.insert(path[k]);
    }
    if (inner.intersects(used)) return false;
    if (path.size() == 2 && std::count(s.paths.begin(), s.paths.end(), path) > 1) return false;
    used |= inner;
  }
  return true;
}

AgentSet min_vertex_cut(const CommGraph& g, AgentId x, AgentId y) {
  check_pair(g, x, y);
  if (g.has_edge(x, y)) throw GraphError("adjacent pair has no vertex cut");
  SplitNetwork net(g, x, y);
  net.run(g.size());
  auto side = net.source_side();
  AgentSet cut;
  for (AgentId v = 0; v < g.size(); ++v) {
    if (side[SplitNetwork::in(v)] && !side[SplitNetwork::out(v)]) cut.insert(v);
  }
  return cut;
}

namespace {

struct WeakestPair {
  std::size_t value;
  AgentId from;
  AgentId to;
  bool complete;
};

WeakestPair weakest_pair(const CommGraph& g) {
  const std::size_t n = g.size();
  if (n < 2) throw GraphError("connectivity needs at least two agents");
  WeakestPair best{n - 1, 0, 1, true};
  for (AgentId x = 0; x < n; ++x) {
    for (AgentId y = 0; y < n; ++y) {
      if (x == y || g.has_edge(x, y)) continue;
      SplitNetwork net(g, x, y);
      auto value = net.run(best.complete ? n : best.value);
      if (best.complete || value < best.value) best = {value, x, y, false};
      if (best.value == 0) return best;
    }
  }
  return best;
}

}  // namespace

std::size_t vertex_connectivity(const CommGraph& g) { return weakest_pair(g).value; }

ConditionVerdict check_connectivity(const CommGraph& g, std::size_t k) {
  if (g.size() < 2) {
    if (k == 0) return {};
    return {false, CutWitness{{}, 0, 0, true}};
  }
  auto weakest = weakest_pair(g);
  if (weakest.value >= k) return {};
  if (weakest.complete) {
    return {false, CutWitness{g.agents() - AgentSet{0, 1}, 0, 1, true}};
  }
  return {false, CutWitness{min_vertex_cut(g, weakest.from, weakest.to), weakest.from, weakest.to, false}};
}

}  // namespace byzset

#include "byzset/protocols.hpp"

#include <algorithm>

#include "byzset/error.hpp"

namespace byzset {

namespace {

AgentSet honest_of(const CommGraph& g, AgentSet faulty) { return g.agents() - faulty; }

}  // namespace

// ---------------------------------------------------------------------------

std::vector<AgentSet> qualifying_quorums(const SetInstance& inst, const std::vector<ValueSet>& reported) {
  const std::size_t n = inst.size();
  if (reported.size() != n) {
    throw ValidationError("reported sets cover " + std::to_string(reported.size()) + " of " + std::to_string(n) +
                          " agents");
  }
  if (inst.f >= n) throw ValidationError("centralized agreement needs f < n");
  SetInstance view{inst.universe, reported, inst.f};
  const std::size_t quorum = n - inst.f;
  const std::size_t smallest = std::max<std::size_t>(1, n > 2 * inst.f ? n - 2 * inst.f : 0);

  std::vector<AgentSet> out;
  for_each_subset(inst.agents(), [&](AgentSet t) {
    if (t.size() != quorum) return;
    const ValueSet y = intersect(view, t);
    bool agree = for_each_subset(t, [&](AgentSet sub) { return sub.size() < smallest || intersect(view, sub) == y; });
    if (agree) out.push_back(t);
  });
  return out;
}

CentralizedResult run_centralized(const SetInstance& inst, const std::vector<ValueSet>& reported) {
  auto all = qualifying_quorums(inst, reported);
  if (all.empty()) return {};
  SetInstance view{inst.universe, reported, inst.f};
  return {intersect(view, all.front()), all.front()};
}

// ---------------------------------------------------------------------------

ValueSet constrained_update(ValueSet local, const std::map<AgentId, ValueSet>& received, std::size_t threshold) {
  ValueSet removed;
  for (auto y : local) {
    std::size_t absent = 0;
    for (const auto& [from, set] : received) {
      if (!set.contains(y)) ++absent;
    }
    if (absent >= threshold) removed.insert(y);
  }
  return local - removed;
}

void ConstrainedProtocol::start(const CommGraph& g, const SetInstance& inst, AgentSet faulty) {
  g_ = &g;
  active_threshold_ = threshold_ ? threshold_ : inst.f + 1;
  universe_ = inst.universe.all();
  honest_ = honest_of(g, faulty);
  target_ = intersect_or_universe(inst, honest_);
  local_ = inst.locals;
}

std::vector<Message> ConstrainedProtocol::emit(std::size_t, AgentId i) {
  std::vector<Message> out;
  for (auto j : g_->out_neighbors(i)) out.push_back({i, j, local_[i], std::nullopt});
  return out;
}

void ConstrainedProtocol::receive(std::size_t, AgentId i, std::span<const Message> inbox) {
  std::map<AgentId, ValueSet> received;
  for (auto j : g_->in_neighbors(i)) received[j] = universe_;
  for (const auto& m : inbox) {
    if (received.count(m.from)) received[m.from] = m.payload;
  }
  local_[i] = constrained_update(local_[i], received, active_threshold_);
}

bool ConstrainedProtocol::done(std::size_t) const {
  for (auto i : honest_)
    if (local_[i] != target_) return false;
  return true;
}

Execution run_constrained(const CommGraph& g, const SetInstance& inst, AgentSet faulty,
                          const AdversaryStrategy& adversary, const ConstrainedOptions& options) {
  ConstrainedProtocol protocol(options.threshold);
  SyncOptions sync{options.max_rounds ? options.max_rounds : g.size(), options.stop_when_done};
  return run_sync(g, protocol, inst, faulty, adversary, sync);
}

// ---------------------------------------------------------------------------

RouteTable build_routes(const CommGraph& g, std::size_t f) {
  RouteTable routes;
  for (AgentId j = 0; j < g.size(); ++j) {
    for (AgentId i = 0; i < g.size(); ++i) {
      if (i == j) continue;
      if (g.has_edge(j, i)) {
        routes[{j, i}] = {{j, i}};
        continue;
      }
      auto paths = disjoint_paths(g, j, i, 2 * f + 1);
      if (paths.paths.size() < 2 * f + 1) {
        throw ValidationError("only " + std::to_string(paths.paths.size()) + " disjoint paths from " +
                              std::to_string(j) + " to " + std::to_string(i) + "; need " +
                              std::to_string(2 * f + 1));
      }
      routes[{j, i}] = std::move(paths.paths);
    }
  }
  return routes;
}

ValueSet resolve_copies(const std::vector<ReceivedCopy>& copies, const std::vector<std::vector<AgentId>>& routes,
                        std::size_t f) {
  std::map<ValueSet, std::set<std::size_t>> support;
  for (const auto& c : copies) {
    auto it = std::find(routes.begin(), routes.end(), c.route);
    if (it == routes.end()) continue;
    support[c.payload].insert(static_cast<std::size_t>(it - routes.begin()));
  }
  std::optional<ValueSet> best;
  std::size_t best_count = 0;
  for (const auto& [payload, via] : support) {
    if (via.size() >= f + 1 && via.size() > best_count) {
      best = payload;
      best_count = via.size();
    }
  }
  return best.value_or(ValueSet{});
}

ValueSet absence_filter(ValueSet local, const std::vector<ValueSet>& z, AgentId self, std::size_t f) {
  ValueSet out;
  for (auto y : local) {
    std::size_t absent = 0;
    for (AgentId k = 0; k < z.size(); ++k) {
      if (k != self && !z[k].contains(y)) ++absent;
    }
    if (absent <= f) out.insert(y);
  }
  return out;
}

void UnconstrainedProtocol::start(const CommGraph& g, const SetInstance& inst, AgentSet) {
  const std::size_t n = g.size();
  g_ = &g;
  f_ = inst.f;
  routes_ = build_routes(g, inst.f);
  horizon_ = 0;
  for (const auto& [pair, paths] : routes_)
    for (const auto& p : paths) horizon_ = std::max(horizon_, p.size() - 1);
  universe_ = inst.universe.all();
  local_ = inst.locals;
  decided_.assign(n, std::nullopt);
  outbox_.assign(n, {});
  direct_.assign(n, {});
  copies_.assign(n, {});
  z_.assign(n, std::vector<ValueSet>(n));
  forwarded_.assign(n, {});
  for (const auto& [pair, paths] : routes_) {
    auto [j, i] = pair;
    for (const auto& p : paths) outbox_[j].push_back({j, p[1], local_[j], RelayHeader{j, i, {j}}});
  }
  if (horizon_ == 0) {
    for (AgentId i = 0; i < n; ++i) {
      z_[i][i] = local_[i];
      decided_[i] = local_[i];
    }
  }
}

std::vector<Message> UnconstrainedProtocol::emit(std::size_t, AgentId i) {
  std::vector<Message> out;
  out.swap(outbox_[i]);
  return out;
}

void UnconstrainedProtocol::receive(std::size_t round, AgentId i, std::span<const Message> inbox) {
  const std::size_t n = g_->size();
  for (const auto& m : inbox) {
    if (!m.relay) continue;
    const auto& h = *m.relay;
    if (h.path.empty() || h.path.front() != h.origin || h.path.back() != m.from) continue;
    if (h.origin >= n || h.destination >= n || h.origin == i || h.origin == h.destination) continue;
    std::vector<AgentId> walked = h.path;
    walked.push_back(i);
    if (h.destination == i) {
      if (walked.size() == 2 && walked.front() == m.from) {
        direct_[i].try_emplace(h.origin, m.payload);
      } else {
        copies_[i][h.origin].push_back({std::move(walked), m.payload});
      }
      continue;
    }
    auto it = routes_.find({h.origin, h.destination});
    if (it == routes_.end()) continue;
    for (const auto& route : it->second) {
      if (route.size() <= walked.size() || !std::equal(walked.begin(), walked.end(), route.begin())) continue;
      RelayHeader next{h.origin, h.destination, walked};
      if (forwarded_[i].insert({next, m.payload.bits()}).second) {
        outbox_[i].push_back({i, route[walked.size()], m.payload, std::move(next)});
      }
      break;
    }
  }

  if (round == horizon_) {
    for (AgentId j = 0; j < n; ++j) {
      if (j == i) {
        z_[i][j] = local_[i];
      } else if (g_->has_edge(j, i)) {
        auto d = direct_[i].find(j);
        z_[i][j] = d == direct_[i].end() ? universe_ : d->second;
      } else {
        z_[i][j] = resolve_copies(copies_[i][j], routes_.at({j, i}), f_);
      }
    }
    decided_[i] = absence_filter(local_[i], z_[i], i, f_);
  }
}

UnconstrainedRun run_unconstrained(const CommGraph& g, const SetInstance& inst, AgentSet faulty,
                                   const AdversaryStrategy& adversary) {
  UnconstrainedProtocol protocol;
  UnconstrainedRun run;
  run.execution = run_sync(g, protocol, inst, faulty, adversary, {std::max<std::size_t>(g.size(), 1), true});
  run.stored.assign(g.size(), {});
  for (auto i : honest_of(g, faulty)) run.stored[i] = protocol.stored(i);
  return run;
}

// ---------------------------------------------------------------------------

void AsyncConstrainedProtocol::start(const CommGraph& g, const SetInstance& inst, AgentSet) {
  g_ = &g;
  f_ = inst.f;
  active_threshold_ = threshold_ ? threshold_ : inst.f + 1;
  local_ = inst.locals;
}

std::size_t AsyncConstrainedProtocol::quorum(AgentId i) const {
  const std::size_t in = g_->in_neighbors(i).size();
  return in > f_ ? in - f_ : 1;
}

void AsyncConstrainedProtocol::advance(AgentId i, const std::map<AgentId, ValueSet>& received) {
  local_[i] = constrained_update(local_[i], received, active_threshold_);
}

Execution run_constrained_async(const CommGraph& g, const SetInstance& inst, AgentSet faulty,
                                const AdversaryStrategy& adversary, const DeliverySchedule& schedule,
                                const AsyncConstrainedOptions& options) {
  AsyncConstrainedProtocol protocol(options.threshold);
  AsyncOptions async{options.max_steps ? options.max_steps : 4 * g.size()};
  return run_async(g, protocol, inst, faulty, adversary, schedule, async);
}

// ---------------------------------------------------------------------------

NecessityDemo demonstrate_necessity(const CommGraph& g, const NecessityScenario& s) {
  NecessityDemo demo;
  demo.scenario = s;
  const ConstrainedOptions fixed{g.size(), 0, false};
  demo.a = run_constrained(g, s.instance_a, s.faulty_a, strategy_split_brain(s.left, s.right, s.y), fixed);

  ReplayTable table;
  for (const auto& e : demo.a.transcript.events) {
    if (e.kind == EventKind::Send && s.faulty_b.contains(e.sender)) table[{e.step, e.sender, e.receiver}] = e.payload;
  }
  demo.b = run_constrained(g, s.instance_b, s.faulty_b, strategy_replay(std::move(table)), fixed);

  demo.victim_indistinguishable = indistinguishable(demo.a.transcript, demo.b.transcript, s.victim);
  demo.correct_a = demo.a.outcome.target;
  demo.correct_b = demo.b.outcome.target;
  for (auto i : g.agents() - s.faulty_a - s.faulty_b) {
    if (!indistinguishable(demo.a.transcript, demo.b.transcript, i)) {
      demo.distinguishing_agent = i;
      break;
    }
  }
  return demo;
}

}  // namespace byzset

#include "byzset/simnet.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "byzset/error.hpp"
#include "byzset/random.hpp"

namespace byzset {

namespace {

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::Send:
      return "send";
    case EventKind::Deliver:
      return "deliver";
    case EventKind::StateChange:
      return "state_change";
    case EventKind::Decide:
      return "decide";
  }
  return "?";
}

void check_run_inputs(const CommGraph& g, const SetInstance& inst, AgentSet faulty) {
  inst.validate();
  if (g.size() != inst.size()) throw ValidationError("graph and instance disagree on the number of agents");
  if (!faulty.subset_of(g.agents())) throw ValidationError("fault set names agents outside the graph");
  if (faulty.size() > inst.f) {
    throw ValidationError("|F| = " + std::to_string(faulty.size()) + " exceeds f = " + std::to_string(inst.f));
  }
}

ProtocolOutcome finish(Transcript& t, std::size_t step, std::size_t rounds, AgentSet honest, const SetInstance& inst,
                       const std::vector<ValueSet>& outputs) {
  ProtocolOutcome out;
  out.decided.assign(inst.size(), std::nullopt);
  out.rounds_elapsed = rounds;
  out.target = intersect_or_universe(inst, honest);
  out.converged = true;
  for (auto i : honest) {
    t.events.push_back({step, EventKind::Decide, i, i, outputs[i], std::nullopt, std::nullopt});
    out.decided[i] = outputs[i];
    if (outputs[i] != out.target) out.converged = false;
  }
  return out;
}

}  // namespace

std::string dump_transcript(const Transcript& t, const Universe& u) {
  std::ostringstream out;
  for (const auto& e : t.events) {
    out << e.step << ' ' << kind_name(e.kind) << ' ' << e.sender << ' ' << e.receiver << ' ';
    out << (e.payload.empty() ? std::string("-") : u.format(e.payload));
    if (e.tag) out << " t=" << *e.tag;
    if (e.relay) {
      out << " @ " << e.relay->origin << ' ' << e.relay->destination;
      for (auto v : e.relay->path) out << ' ' << v;
    }
    out << '\n';
  }
  return out.str();
}

std::uint64_t transcript_digest(const Transcript& t, const Universe& u) { return fnv1a(dump_transcript(t, u)); }

std::vector<Event> view_of(const Transcript& t, AgentId i) {
  std::vector<Event> out;
  for (const auto& e : t.events) {
    const bool own = (e.kind == EventKind::StateChange || e.kind == EventKind::Decide) && e.sender == i;
    const bool inbound = e.kind == EventKind::Deliver && e.receiver == i;
    if (own || inbound) out.push_back(e);
  }
  return out;
}

bool indistinguishable(const Transcript& a, const Transcript& b, AgentId i) { return view_of(a, i) == view_of(b, i); }

// ---------------------------------------------------------------------------

Execution run_sync(const CommGraph& g, SyncProtocol& protocol, const SetInstance& inst, AgentSet faulty,
                   const AdversaryStrategy& adversary, const SyncOptions& options) {
  check_run_inputs(g, inst, faulty);
  const std::size_t n = g.size();
  const AgentSet honest = g.agents() - faulty;
  const ValueSet universe = inst.universe.all();
  protocol.start(g, inst, faulty);

  Execution exec;
  auto& events = exec.transcript.events;
  std::vector<ValueSet> last(n);
  for (auto i : honest) {
    last[i] = protocol.state(i);
    events.push_back({0, EventKind::StateChange, i, i, last[i], std::nullopt, std::nullopt});
  }

  std::size_t rounds = 0;
  if (!(options.stop_when_done && protocol.done(0))) {
    for (std::size_t t = 1; t <= options.max_rounds; ++t) {
      std::vector<Message> sent;
      for (AgentId i = 0; i < n; ++i) {
        for (auto m : protocol.emit(t, i)) {
          m.from = i;
          if (!g.has_edge(i, m.to)) throw std::logic_error("protocol sent along a non-edge");
          if (faulty.contains(i)) {
            SendContext ctx{t, i, m.to, m.payload, &inst, &g, faulty};
            if (m.relay) {
              auto forged = adversary.on_relay(ctx, m);
              if (!forged) continue;
              forged->from = i;
              forged->to = m.to;
              m = std::move(*forged);
            } else {
              auto payload = adversary.on_send(ctx);
              if (!payload) continue;
              m.payload = *payload;
            }
            m.payload &= universe;
          }
          sent.push_back(std::move(m));
        }
      }
      for (const auto& m : sent) events.push_back({t, EventKind::Send, m.from, m.to, m.payload, m.relay, std::nullopt});
      for (const auto& m : sent) {
        events.push_back({t, EventKind::Deliver, m.from, m.to, m.payload, m.relay, std::nullopt});
      }

      std::vector<std::vector<Message>> inbox(n);
      for (auto& m : sent) inbox[m.to].push_back(std::move(m));
      for (AgentId i = 0; i < n; ++i) {
        std::stable_sort(inbox[i].begin(), inbox[i].end(),
                         [](const Message& a, const Message& b) { return a.from < b.from; });
        protocol.receive(t, i, inbox[i]);
      }
      for (auto i : honest) {
        auto now = protocol.state(i);
        if (now != last[i]) {
          events.push_back({t, EventKind::StateChange, i, i, now, std::nullopt, std::nullopt});
          last[i] = now;
        }
      }
      rounds = t;
      if (options.stop_when_done && protocol.done(t)) break;
    }
  }

  std::vector<ValueSet> outputs(n);
  for (auto i : honest) outputs[i] = protocol.output(i).value_or(protocol.state(i));
  exec.outcome = finish(exec.transcript, rounds, rounds, honest, inst, outputs);
  return exec;
}

// ---------------------------------------------------------------------------

void validate_schedule(const DeliverySchedule& s, const CommGraph& g, std::size_t f) {
  if (s.policy != DeliverySchedule::Policy::Synchronous && s.max_delay == 0) {
    throw ValidationError("max_delay must be at least 1");
  }
  if (s.policy != DeliverySchedule::Policy::Starve && !s.starved.empty()) {
    throw ValidationError("starved links given for a non-starving schedule");
  }
  std::vector<std::size_t> per_receiver(g.size(), 0);
  for (auto [from, to] : s.starved) {
    if (from >= g.size() || to >= g.size() || !g.has_edge(from, to)) {
      throw ValidationError("starved link (" + std::to_string(from) + "," + std::to_string(to) + ") is not an edge");
    }
    if (++per_receiver[to] > f) {
      throw ValidationError("more than f starved links into agent " + std::to_string(to) + ": schedule is unfair");
    }
  }
}

namespace {

struct Pending {
  std::size_t time;
  std::uint64_t tiebreak;
  std::uint64_t seq;
  AgentId from;
  AgentId to;
  std::size_t tag;
  ValueSet payload;
  bool operator>(const Pending& o) const {
    return std::tie(time, tiebreak, seq) > std::tie(o.time, o.tiebreak, o.seq);
  }
};

}  // namespace

Execution run_async(const CommGraph& g, AsyncProtocol& protocol, const SetInstance& inst, AgentSet faulty,
                    const AdversaryStrategy& adversary, const DeliverySchedule& schedule, const AsyncOptions& options) {
  check_run_inputs(g, inst, faulty);
  validate_schedule(schedule, g, inst.f);
  const std::size_t n = g.size();
  const AgentSet honest = g.agents() - faulty;
  const ValueSet universe = inst.universe.all();
  const ValueSet target = intersect_or_universe(inst, honest);
  protocol.start(g, inst, faulty);

  Execution exec;
  auto& events = exec.transcript.events;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
  std::uint64_t seq = 0;
  std::vector<std::size_t> step(n, 1);
  std::vector<std::map<std::size_t, std::map<AgentId, ValueSet>>> buffer(n);
  std::vector<ValueSet> last(n);

  auto delay = [&](AgentId from, AgentId to, std::size_t tag) -> std::optional<std::size_t> {
    using P = DeliverySchedule::Policy;
    if (schedule.policy == P::Synchronous) return 1;
    if (schedule.policy == P::Starve && schedule.starved.count({from, to})) return std::nullopt;
    return 1 + hash_words({schedule.seed, tag, from, to}) % schedule.max_delay;
  };

  auto broadcast = [&](AgentId i, std::size_t now) {
    const std::size_t tag = step[i];
    const ValueSet honest_payload = protocol.outgoing(i);
    for (auto to : g.out_neighbors(i)) {
      ValueSet payload = honest_payload;
      if (faulty.contains(i)) {
        // A withheld message is modelled as the whole universe.
        payload = adversary.on_send({tag, i, to, honest_payload, &inst, &g, faulty}).value_or(universe) & universe;
      }
      events.push_back({now, EventKind::Send, i, to, payload, std::nullopt, tag});
      if (auto d = delay(i, to, tag)) {
        queue.push({now + *d, hash_words({schedule.seed, now + *d, i, to, tag}), seq++, i, to, tag, payload});
      }
    }
  };

  auto on_target = [&] {
    for (auto i : honest)
      if (protocol.state(i) != target) return false;
    return true;
  };

  for (auto i : honest) {
    last[i] = protocol.state(i);
    events.push_back({0, EventKind::StateChange, i, i, last[i], std::nullopt, std::nullopt});
  }

  std::size_t now = 0;
  bool converged = on_target();
  if (!converged) {
    for (AgentId i = 0; i < n; ++i) broadcast(i, 0);
  }
  while (!converged && !queue.empty()) {
    now = queue.top().time;
    while (!queue.empty() && queue.top().time == now) {
      auto p = queue.top();
      queue.pop();
      events.push_back({now, EventKind::Deliver, p.from, p.to, p.payload, std::nullopt, p.tag});
      if (p.tag >= step[p.to]) buffer[p.to][p.tag][p.from] = p.payload;
    }
    for (AgentId i = 0; i < n; ++i) {
      while (step[i] <= options.max_steps) {
        auto it = buffer[i].find(step[i]);
        if (it == buffer[i].end() || it->second.size() < protocol.quorum(i)) break;
        protocol.advance(i, it->second);
        buffer[i].erase(it);
        ++step[i];
        if (honest.contains(i) && protocol.state(i) != last[i]) {
          last[i] = protocol.state(i);
          events.push_back({now, EventKind::StateChange, i, i, last[i], std::nullopt, std::nullopt});
        }
        if (step[i] <= options.max_steps) broadcast(i, now);
      }
    }
    converged = on_target();
  }
  // Drain: fairness means everything in flight still arrives.
  while (!queue.empty()) {
    auto p = queue.top();
    queue.pop();
    now = std::max(now, p.time);
    events.push_back({p.time, EventKind::Deliver, p.from, p.to, p.payload, std::nullopt, p.tag});
  }

  std::size_t rounds = 0;
  std::vector<ValueSet> outputs(n);
  for (auto i : honest) {
    rounds = std::max(rounds, step[i] - 1);
    outputs[i] = protocol.state(i);
  }
  exec.outcome = finish(exec.transcript, now, rounds, honest, inst, outputs);
  return exec;
}

}  // namespace byzset

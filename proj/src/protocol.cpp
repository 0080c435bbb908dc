#include "birdsim/protocol.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "birdsim/error.hpp"

namespace birdsim {

bool ProtocolState::current_tick_outstanding() const {
  if (!current_tick) return false;
  auto it = outstanding.lower_bound(OutstandingKey{*current_tick, -1, {}});
  return it != outstanding.end() && it->first.tick == *current_tick;
}

ProtocolState make_protocol_state(double t_int, double epoch, MissionTimeline timeline,
                                  const NodeRegistry& nodes) {
  if (!(t_int > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_int must be > 0");
  if (timeline.phases.empty()) {
    throw Error(ErrorCode::InvalidArgument, "timeline needs at least one phase");
  }
  ProtocolState s;
  s.t_int = t_int;
  s.epoch = epoch;
  s.timeline = std::move(timeline);
  for (const auto& node : nodes.all()) {
    if (node.node_id == 0) continue;
    s.server_locations[node.node_id] = node.location;
    if (node.mobile) s.mobile_servers.insert(node.node_id);
  }
  return s;
}

TickResult on_tick(ProtocolState& state, double t_i, std::span<const Task> due,
                   const ProtocolContext& ctx) {
  if (t_i != state.tick_time(state.next_tick)) {
    std::ostringstream msg;
    msg << "tick at " << t_i << " but next tick is scheduled at "
        << state.tick_time(state.next_tick);
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
  TickResult result;
  result.tick = state.next_tick;
  state.current_tick = state.next_tick;
  ++state.next_tick;
  ++state.counters.ticks;

  for (const auto& task : due) {
    for (const auto& program_id : task.required_programs) {
      state.backlog.push_back(WorkItem{task.task_id, program_id, task.consumer, std::nullopt});
    }
  }

  std::deque<WorkItem> pending;
  pending.swap(state.backlog);
  std::map<int, UpdateRequest> per_server;

  for (auto& item : pending) {
    auto program_it = ctx.programs.find(item.program_id);
    if (program_it == ctx.programs.end()) {
      throw Error(ErrorCode::DanglingReference, "unknown program '" + item.program_id + "'");
    }
    auto candidates = candidates_for(item.program_id, ctx.tables, ctx.nodes);
    if (item.excluded_server) {
      std::erase_if(candidates,
                    [&](const Candidate& c) { return c.server_id == *item.excluded_server; });
      item.excluded_server.reset();
    }
    if (candidates.empty()) {
      ++state.counters.unservable;
      result.unservable.push_back(item);
      state.backlog.push_back(item);
      continue;
    }
    OffloadDecision decision = select_server(program_it->second, candidates, ctx.nodes,
                                             ctx.network, ctx.flight, t_i, item.consumer);
    Dispatch dispatch{result.tick, item, decision};
    if (decision.chosen_server == 0) {
      ++state.counters.local_executions;
      result.local.push_back(std::move(dispatch));
      continue;
    }
    OutstandingKey key{result.tick, decision.chosen_server, item.program_id};
    auto [entry_it, inserted] = state.outstanding.try_emplace(key);
    entry_it->second.issued_at = t_i;
    entry_it->second.waiting.push_back(item);
    if (inserted) {
      ++state.counters.request_entries;
      auto& request = per_server[decision.chosen_server];
      request.tick_index = result.tick;
      request.issued_at = t_i;
      request.t_pos = state.timeline.t_pos;
      request.server_id = decision.chosen_server;
      request.programs.push_back(
          {item.program_id, decision.chosen_server, program_it->second.input_payload});
      result.remote.push_back(std::move(dispatch));
    }
  }

  for (auto& [server, request] : per_server) {
    ++state.counters.request_messages;
    result.requests.push_back(std::move(request));
  }
  return result;
}

ResponseOutcome on_response(ProtocolState& state, const UpdateResponse& resp) {
  OutstandingKey key{resp.tick_index, resp.server_id, resp.program_id};
  auto it = state.outstanding.find(key);
  if (it == state.outstanding.end()) {
    std::ostringstream msg;
    msg << "no outstanding request for tick " << resp.tick_index << ", server "
        << resp.server_id << ", program '" << resp.program_id << "'";
    throw Error(ErrorCode::UnknownResponse, msg.str());
  }
  if (resp.completed_at < it->second.issued_at) {
    throw Error(ErrorCode::InvariantViolation, "response completed before its request was issued");
  }
  ResponseOutcome out{key, std::move(it->second.waiting)};
  state.outstanding.erase(it);
  ++state.counters.responses;
  if (state.mobile_servers.count(resp.server_id) != 0) {
    state.server_locations[resp.server_id] = resp.server_location;
  }
  state.phase_results.insert(resp.program_id);
  return out;
}

void on_local_result(ProtocolState& state, const std::string& program_id) {
  state.phase_results.insert(program_id);
}

namespace {

std::vector<TimedOut> expire(ProtocolState& state,
                             const std::function<bool(const OutstandingKey&)>& select) {
  std::vector<TimedOut> out;
  for (auto it = state.outstanding.begin(); it != state.outstanding.end();) {
    if (!select(it->first)) {
      ++it;
      continue;
    }
    TimedOut t{it->first, std::move(it->second.waiting)};
    for (auto& item : t.requeued) {
      item.excluded_server = t.key.server;
      state.backlog.push_back(item);
    }
    ++state.counters.timeouts;
    out.push_back(std::move(t));
    it = state.outstanding.erase(it);
  }
  return out;
}

}  // namespace

std::vector<TimedOut> on_timeout(ProtocolState& state, std::uint64_t tick_index, double t) {
  if (t != state.tick_time(tick_index) + state.t_int) {
    throw Error(ErrorCode::InvalidArgument, "timeout fired at the wrong time");
  }
  return expire(state, [&](const OutstandingKey& k) { return k.tick == tick_index; });
}

std::vector<TimedOut> flush_outstanding(ProtocolState& state) {
  return expire(state, [](const OutstandingKey&) { return true; });
}

bool phase_complete(const TimelinePhase& phase, const std::set<std::string>& results) {
  if (phase.complete_when.empty()) return false;
  return std::all_of(phase.complete_when.begin(), phase.complete_when.end(),
                     [&](const std::string& p) { return results.count(p) != 0; });
}

AdvanceResult try_advance(ProtocolState& state, double t) {
  AdvanceResult r;
  r.from = r.to = state.timeline.t_pos;
  if (state.current_tick_outstanding()) {
    r.gated = true;
    return r;
  }
  state.last_awareness = t;
  while (!state.timeline.at_last_phase() &&
         phase_complete(state.timeline.current(), state.phase_results)) {
    ++state.timeline.t_pos;
    state.phase_results.clear();
    ++state.counters.advances;
  }
  r.to = state.timeline.t_pos;
  return r;
}

}  // namespace birdsim

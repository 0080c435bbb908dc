#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "birdsim/channel.hpp"
#include "birdsim/core_model.hpp"
#include "birdsim/policy.hpp"

namespace birdsim {

/// One program of one task waiting to be served.
struct WorkItem {
  std::string task_id;
  std::string program_id;
  int consumer = 0;
  std::optional<int> excluded_server;  // skipped for one matching round after a timeout
};

struct RequestedProgram {
  std::string program_id;
  int server_id = 0;
  double input_payload = 0.0;
};

/// Per-server bundle of programs issued at one tick.
struct UpdateRequest {
  std::uint64_t tick_index = 0;
  double issued_at = 0.0;
  std::size_t t_pos = 0;
  int server_id = 0;
  std::vector<RequestedProgram> programs;
};

struct UpdateResponse {
  std::uint64_t tick_index = 0;
  int server_id = 0;
  std::string program_id;
  double result_payload = 0.0;
  Vec3 server_location;
  double completed_at = 0.0;
};

struct OutstandingKey {
  std::uint64_t tick = 0;
  int server = 0;
  std::string program;

  auto operator<=>(const OutstandingKey&) const = default;
};

struct OutstandingEntry {
  double issued_at = 0.0;
  std::vector<WorkItem> waiting;  // items served by this one execution
};

struct Dispatch {
  std::uint64_t tick = 0;
  WorkItem item;
  OffloadDecision decision;
};

struct TickResult {
  std::uint64_t tick = 0;
  std::vector<UpdateRequest> requests;  // ascending server id
  std::vector<Dispatch> remote;         // one per new outstanding entry
  std::vector<Dispatch> local;          // executed on the UAV, no wire request
  std::vector<WorkItem> unservable;     // retried next tick
};

struct ProtocolCounters {
  std::uint64_t ticks = 0;
  std::uint64_t request_messages = 0;
  std::uint64_t request_entries = 0;  // (tick, server, program) triples issued
  std::uint64_t responses = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t local_executions = 0;
  std::uint64_t unservable = 0;
  std::uint64_t advances = 0;
};

struct ProtocolState {
  double t_int = 1.0;
  double epoch = 0.0;
  std::uint64_t next_tick = 0;
  std::optional<std::uint64_t> current_tick;
  std::map<OutstandingKey, OutstandingEntry> outstanding;
  MissionTimeline timeline;
  std::map<int, Vec3> server_locations;
  std::set<int> mobile_servers;
  std::deque<WorkItem> backlog;
  std::set<std::string> phase_results;  // programs with results since the phase began
  std::optional<double> last_awareness;
  ProtocolCounters counters;

  double tick_time(std::uint64_t tick) const { return epoch + static_cast<double>(tick) * t_int; }
  bool current_tick_outstanding() const;
};

ProtocolState make_protocol_state(double t_int, double epoch, MissionTimeline timeline,
                                  const NodeRegistry& nodes);

/// Everything the policy needs to place programs at one tick.
struct ProtocolContext {
  const std::map<std::string, ProgramSpec>& programs;
  const ProgramTables& tables;
  const NodeRegistry& nodes;
  const Network& network;
  FlightState flight;
};

/// Runs matching and placement for the backlog plus `due` tasks at tick time
/// `t_i`, which must equal the next scheduled tick.
TickResult on_tick(ProtocolState& state, double t_i, std::span<const Task> due,
                   const ProtocolContext& ctx);

struct ResponseOutcome {
  OutstandingKey key;
  std::vector<WorkItem> completed;
};

/// Throws UnknownResponse when no outstanding entry matches.
ResponseOutcome on_response(ProtocolState& state, const UpdateResponse& resp);

/// Result of a program executed on the UAV itself.
void on_local_result(ProtocolState& state, const std::string& program_id);

struct TimedOut {
  OutstandingKey key;
  std::vector<WorkItem> requeued;
};

/// Expires the tick's unresolved entries at `t` = tick time + t_int and
/// requeues their items with the failed server excluded once.
std::vector<TimedOut> on_timeout(ProtocolState& state, std::uint64_t tick_index, double t);

/// Expires everything still outstanding; used when the run ends.
std::vector<TimedOut> flush_outstanding(ProtocolState& state);

struct AdvanceResult {
  bool gated = false;
  std::size_t from = 0;
  std::size_t to = 0;

  bool advanced() const { return to > from; }
};

/// Advances t_pos when the current tick has nothing outstanding and the
/// phase's completion predicate holds. Refreshes the awareness time whenever
/// not gated.
AdvanceResult try_advance(ProtocolState& state, double t);

bool phase_complete(const TimelinePhase& phase, const std::set<std::string>& results);

}  // namespace birdsim

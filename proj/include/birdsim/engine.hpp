#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "birdsim/channel.hpp"
#include "birdsim/core_model.hpp"
#include "birdsim/pipeline.hpp"
#include "birdsim/protocol.hpp"
#include "birdsim/scenario.hpp"

namespace birdsim {

enum class EventKind {
  Tick,
  TransferComplete,
  ComputeComplete,
  Timeout,
  FlightWaypoint,
  TaskIssued,
  TruckArrival,
};

const char* to_string(EventKind kind);

struct Event {
  double t = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Tick;
  std::uint64_t ref = 0;  // kind-specific index (tick, job, task, waypoint)
};

/// Min-queue on (t, seq). Simultaneous events pop in insertion order.
class EventQueue {
 public:
  std::uint64_t push(double t, EventKind kind, std::uint64_t ref);
  Event pop();
  const Event& top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.t != b.t) return a.t > b.t;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

struct ExecutionRecord {
  std::string task_id;  // first task served by this execution
  std::string program_id;
  std::uint64_t tick = 0;
  int server_id = 0;
  int consumer = 0;
  bool local = false;
  double dispatched_at = 0.0;
  double delivered_at = 0.0;  // result reached the consumer
  double completed_at = 0.0;  // UAV learned of the result
  LatencyBreakdown actual;
  LatencyBreakdown predicted;
};

struct TaskRecord {
  std::string task_id;
  TaskOrigin origin = TaskOrigin::CommanderOrder;
  double issue_time = 0.0;
  std::optional<double> completion_time;
  std::vector<int> servers;  // server that delivered each completed program
};

struct MetricsRecord {
  std::vector<TaskRecord> tasks;
  std::vector<ExecutionRecord> executions;
  CriticalMoments moments;
  ProtocolCounters counters;
  std::vector<LinkSample> link_samples;
  std::uint64_t lost_responses = 0;
  std::uint64_t cancelled_events = 0;
  std::size_t final_t_pos = 0;
  std::optional<double> last_awareness;
  double end_time = 0.0;

  std::size_t tasks_completed() const;
  std::optional<double> mean_t_e2e() const;
  std::optional<double> mean_t_comm() const;
  std::optional<double> reported_to_virtual_awareness() const;
};

struct RunResult {
  MetricsRecord metrics;
  std::vector<std::string> trace;  // one line per record
};

/// Rule used to time virtual awareness; echoed into the trace.
inline constexpr const char* kVirtualAwarenessRule = "first-monitoring-result-at-remote-consumer";

/// Executes the scenario to its duration (or battery exhaustion, whichever
/// is first). `seed` overrides the scenario seed when given.
RunResult run(const Scenario& scenario, std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace birdsim

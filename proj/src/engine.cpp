#include "birdsim/engine.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <map>
#include <random>

#include "birdsim/error.hpp"

namespace birdsim {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Tick: return "Tick";
    case EventKind::TransferComplete: return "TransferComplete";
    case EventKind::ComputeComplete: return "ComputeComplete";
    case EventKind::Timeout: return "Timeout";
    case EventKind::FlightWaypoint: return "FlightWaypoint";
    case EventKind::TaskIssued: return "TaskIssued";
    case EventKind::TruckArrival: return "TruckArrival";
  }
  return "?";
}

std::uint64_t EventQueue::push(double t, EventKind kind, std::uint64_t ref) {
  const std::uint64_t seq = next_seq_++;
  heap_.push(Event{t, seq, kind, ref});
  return seq;
}

Event EventQueue::pop() {
  Event e = heap_.top();
  heap_.pop();
  return e;
}

std::size_t MetricsRecord::tasks_completed() const {
  return static_cast<std::size_t>(std::count_if(
      tasks.begin(), tasks.end(), [](const TaskRecord& t) { return t.completion_time.has_value(); }));
}

namespace {

template <typename F>
std::optional<double> mean_of(const std::vector<ExecutionRecord>& records, F field) {
  if (records.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& r : records) sum += field(r);
  return sum / static_cast<double>(records.size());
}

}  // namespace

std::optional<double> MetricsRecord::mean_t_e2e() const {
  return mean_of(executions, [](const ExecutionRecord& r) { return r.actual.t_e2e; });
}

std::optional<double> MetricsRecord::mean_t_comm() const {
  return mean_of(executions, [](const ExecutionRecord& r) { return r.actual.t_comm; });
}

std::optional<double> MetricsRecord::reported_to_virtual_awareness() const {
  const auto& reported = moments.get(Moment::Reported);
  const auto& virt = moments.get(Moment::VirtualAwareness);
  if (!reported || !virt) return std::nullopt;
  return *virt - *reported;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt(const Vec3& v) { return fmt(v.x) + "," + fmt(v.y) + "," + fmt(v.z); }

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

enum class Stage : std::uint64_t { Encode = 0, Uplink = 1, Process = 2, Result = 3, Response = 4 };

const char* to_string(Stage s) {
  switch (s) {
    case Stage::Encode: return "encode";
    case Stage::Uplink: return "uplink";
    case Stage::Process: return "process";
    case Stage::Result: return "result";
    case Stage::Response: return "response";
  }
  return "?";
}

constexpr std::uint64_t kStages = 8;

struct Job {
  std::uint64_t id = 0;
  bool local = false;
  OutstandingKey key;
  const ProgramSpec* program = nullptr;
  WorkItem item;
  int executor = 0;
  int consumer = 0;
  double dispatched = 0.0;
  double t_enc = 0.0;
  double t_comm = 0.0;
  double t_dec = 0.0;
  double t_proc = 0.0;
  LatencyBreakdown predicted;
  bool cancelled = false;
  std::optional<double> delivered_at;
  std::optional<double> responded_at;
  std::vector<WorkItem> completed_items;
  bool finished = false;
};

class Simulation {
 public:
  Simulation(const Scenario& scenario, std::uint64_t seed)
      : sc_(scenario),
        seed_(seed),
        network_(scenario.network(seed)),
        state_(make_protocol_state(scenario.t_int, scenario.epoch,
                                   MissionTimeline{scenario.phases, 0, {}}, scenario.nodes)) {
    const auto& uav = sc_.nodes.at(0);
    end_ = std::min(sc_.duration, uav.battery_budget.value_or(kMaxBatteryBudgetSeconds));
  }

  RunResult execute() {
    now_ = 0.0;
    seed_moments();
    for (std::size_t i = 0; i < sc_.flight_plan.size(); ++i) {
      queue_.push(sc_.flight_plan[i].t, EventKind::FlightWaypoint, i);
    }
    for (const auto& task : sc_.tasks) issue_task(task, task.issue_time);
    issue_implied_tasks(sc_.epoch);
    if (sc_.incident.truck_arrival) {
      queue_.push(*sc_.incident.truck_arrival, EventKind::TruckArrival, 0);
    }
    queue_.push(state_.tick_time(0), EventKind::Tick, 0);

    while (!queue_.empty() && queue_.top().t <= end_) {
      const Event e = queue_.pop();
      if (e.t < now_) throw Error(ErrorCode::Runtime, "event executed out of time order");
      now_ = e.t;
      seq_ = e.seq;
      dispatch(e);
    }
    metrics_.cancelled_events = queue_.size();
    finish_run();

    metrics_.moments = state_.timeline.moments;
    metrics_.counters = state_.counters;
    metrics_.final_t_pos = state_.timeline.t_pos;
    metrics_.last_awareness = state_.last_awareness;
    metrics_.end_time = end_;
    for (const auto& id : task_order_) metrics_.tasks.push_back(tasks_.at(id).record);
    return {std::move(metrics_), std::move(trace_)};
  }

 private:
  struct TaskState {
    TaskRecord record;
    std::map<std::string, int> remaining;
  };

  void emit(const char* kind, const std::string& fields) {
    char head[96];
    std::snprintf(head, sizeof head, "t=%s seq=%" PRIu64 " kind=%s", fmt(now_).c_str(), seq_,
                  kind);
    std::string line = head;
    if (!fields.empty()) line += " " + fields;
    trace_.push_back(std::move(line));
  }

  void set_moment(Moment m, double t, const std::string& extra = {}) {
    state_.timeline.moments = record_moment(state_.timeline.moments, m, t);
    std::string fields = std::string("name=") + to_string(m) + " value=" + fmt(t);
    if (!extra.empty()) fields += " " + extra;
    emit("Moment", fields);
  }

  void seed_moments() {
    set_moment(Moment::Start, sc_.incident.start);
    set_moment(Moment::Observed, sc_.incident.observed);
    set_moment(Moment::Reported, sc_.incident.reported);
  }

  void issue_task(Task task, double t) {
    task.issue_time = t;
    const std::uint64_t index = all_tasks_.size();
    all_tasks_.push_back(std::move(task));
    queue_.push(t, EventKind::TaskIssued, index);
  }

  void issue_implied_tasks(double t) {
    const auto& phase = state_.timeline.current();
    for (std::size_t i = 0; i < phase.implied.size(); ++i) {
      const auto& implied = phase.implied[i];
      Task task;
      task.task_id = phase.phase_id + "/" + std::to_string(i) + "-" + implied.task_kind.name();
      task.required_programs = sc_.programs_of_kind(implied.task_kind);
      task.origin = TaskOrigin::TimelineImplied;
      task.consumer = implied.consumer;
      issue_task(std::move(task), t);
    }
  }

  void dispatch(const Event& e) {
    switch (e.kind) {
      case EventKind::Tick: handle_tick(e.ref); break;
      case EventKind::TaskIssued: handle_task_issued(e.ref); break;
      case EventKind::FlightWaypoint: {
        const auto& wp = sc_.flight_plan.at(e.ref);
        emit("FlightWaypoint", "index=" + std::to_string(e.ref) + " altitude=" + fmt(wp.altitude) +
                                   " rotating=" + (wp.rotating ? "1" : "0"));
        break;
      }
      case EventKind::TruckArrival:
        emit("TruckArrival", "");
        set_moment(Moment::PhysicalAwareness, now_);
        break;
      case EventKind::Timeout: handle_timeout(e.ref); break;
      case EventKind::ComputeComplete:
      case EventKind::TransferComplete:
        handle_job_event(e.kind, e.ref / kStages, static_cast<Stage>(e.ref % kStages));
        break;
    }
  }

  void handle_task_issued(std::uint64_t index) {
    const Task& task = all_tasks_.at(index);
    if (tasks_.count(task.task_id) != 0) {
      throw Error(ErrorCode::Runtime, "task id issued twice: " + task.task_id);
    }
    TaskState ts;
    ts.record.task_id = task.task_id;
    ts.record.origin = task.origin;
    ts.record.issue_time = task.issue_time;
    for (const auto& p : task.required_programs) ++ts.remaining[p];
    tasks_.emplace(task.task_id, std::move(ts));
    task_order_.push_back(task.task_id);
    due_.push_back(task);

    std::string programs;
    for (const auto& p : task.required_programs) programs += (programs.empty() ? "" : ";") + p;
    emit("TaskIssued", "task=" + task.task_id + " origin=" + to_string(task.origin) +
                           " programs=" + programs + " consumer=" + std::to_string(task.consumer));
  }

  void handle_tick(std::uint64_t tick) {
    const FlightState flight = flight_state_at(sc_, now_);
    const ProtocolContext ctx{sc_.programs, sc_.tables, sc_.nodes, network_, flight};
    std::vector<Task> due;
    due.swap(due_);
    const std::size_t t_pos = state_.timeline.t_pos;
    TickResult result = on_tick(state_, now_, due, ctx);
    if (result.tick != tick) throw Error(ErrorCode::Runtime, "tick index mismatch");

    std::size_t entries = 0;
    for (const auto& r : result.requests) entries += r.programs.size();
    emit("Tick", "tick=" + std::to_string(tick) + " t_pos=" + std::to_string(t_pos) +
                     " due=" + std::to_string(due.size()) +
                     " messages=" + std::to_string(result.requests.size()) +
                     " entries=" + std::to_string(entries) +
                     " local=" + std::to_string(result.local.size()) +
                     " unservable=" + std::to_string(result.unservable.size()) +
                     " altitude=" + fmt(flight.altitude) +
                     " rotating=" + (flight.rotating ? "1" : "0") +
                     " band=" + to_string(band_for(flight.altitude, flight.rotating)));

    for (const auto& item : result.unservable) {
      emit("Unservable", "tick=" + std::to_string(tick) + " task=" + item.task_id +
                             " program=" + item.program_id);
    }
    for (const auto& d : result.remote) {
      emit("Request", "tick=" + std::to_string(tick) +
                          " server=" + std::to_string(d.decision.chosen_server) +
                          " program=" + d.item.program_id +
                          " candidates=" + std::to_string(d.decision.candidates_considered) +
                          " predicted_e2e=" + fmt(d.decision.predicted.t_e2e));
      start_job(d, false);
    }
    for (const auto& d : result.local) {
      emit("Local", "tick=" + std::to_string(tick) + " task=" + d.item.task_id +
                        " program=" + d.item.program_id +
                        " candidates=" + std::to_string(d.decision.candidates_considered) +
                        " predicted_e2e=" + fmt(d.decision.predicted.t_e2e));
      start_job(d, true);
    }

    if (!result.remote.empty()) {
      queue_.push(state_.tick_time(tick) + state_.t_int, EventKind::Timeout, tick);
    }
    const double next = state_.tick_time(tick + 1);
    if (next < end_) queue_.push(next, EventKind::Tick, tick + 1);
    advance();
  }

  void schedule(Job& job, EventKind kind, Stage stage, double at) {
    queue_.push(at, kind, job.id * kStages + static_cast<std::uint64_t>(stage));
  }

  double hop(int from, int to, double payload) {
    const TransferResult r = network_.hop(from, to, payload, now_, flight_state_at(sc_, now_));
    if (r.sample) metrics_.link_samples.push_back(*r.sample);
    return r.seconds;
  }

  bool response_lost(const OutstandingKey& key) const {
    auto it = sc_.loss_probability.find(key.server);
    if (it == sc_.loss_probability.end() || it->second <= 0.0) return false;
    const std::uint64_t h = fnv1a(key.program);
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      0x1055u,
                      static_cast<std::uint32_t>(key.tick), static_cast<std::uint32_t>(key.tick >> 32),
                      static_cast<std::uint32_t>(key.server), static_cast<std::uint32_t>(h),
                      static_cast<std::uint32_t>(h >> 32)};
    std::mt19937_64 rng(seq);
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < it->second;
  }

  void start_job(const Dispatch& d, bool local) {
    Job job;
    job.id = jobs_.size();
    job.local = local;
    job.key = OutstandingKey{d.tick, d.decision.chosen_server, d.item.program_id};
    job.program = &sc_.programs.at(d.item.program_id);
    job.item = d.item;
    job.executor = d.decision.chosen_server;
    job.consumer = d.item.consumer;
    job.dispatched = now_;
    job.predicted = d.decision.predicted;
    jobs_.push_back(job);
    Job& j = jobs_.back();

    if (!local) {
      job_by_key_[j.key] = j.id;
      if (response_lost(j.key)) {
        ++metrics_.lost_responses;
        j.cancelled = true;
        emit("Lost", "job=" + std::to_string(j.id) + " tick=" + std::to_string(j.key.tick) +
                         " server=" + std::to_string(j.key.server) + " program=" + j.key.program);
        return;
      }
    }
    const NodeProfile& executor = sc_.nodes.at(j.executor);
    if (local && j.consumer == 0) {
      j.t_proc = stage_time(j.program->compute_cost, executor);
      schedule(j, EventKind::ComputeComplete, Stage::Process, now_ + j.t_proc);
      return;
    }
    j.t_enc = stage_time(j.program->encode_cost, sc_.nodes.at(0));
    schedule(j, EventKind::ComputeComplete, Stage::Encode, now_ + j.t_enc);
  }

  void handle_job_event(EventKind kind, std::uint64_t job_id, Stage stage) {
    Job& j = jobs_.at(job_id);
    const std::string tag = "job=" + std::to_string(j.id) + " stage=" + to_string(stage) +
                            " server=" + std::to_string(j.executor) +
                            " program=" + j.program->program_id;
    if (j.cancelled) {
      emit(to_string(kind), tag + " cancelled=1");
      return;
    }
    emit(to_string(kind), tag);
    const NodeProfile& executor = sc_.nodes.at(j.executor);
    switch (stage) {
      case Stage::Encode:
        if (j.executor != 0) {
          const double d = hop(0, j.executor, j.program->input_payload);
          j.t_comm += d;
          schedule(j, EventKind::TransferComplete, Stage::Uplink, now_ + d);
        } else {
          start_processing(j, executor);
        }
        break;
      case Stage::Uplink:
        start_processing(j, executor);
        break;
      case Stage::Process:
        if (j.consumer == j.executor) {
          deliver(j);
        } else {
          const double d = hop(j.executor, j.consumer, j.program->output_payload);
          j.t_comm += d;
          schedule(j, EventKind::TransferComplete, Stage::Result, now_ + d);
        }
        if (!j.local && j.consumer != 0) {
          const double d = hop(j.executor, 0, j.program->output_payload);
          schedule(j, EventKind::TransferComplete, Stage::Response, now_ + d);
        }
        break;
      case Stage::Result:
        deliver(j);
        if (!j.local && j.consumer == 0) respond(j);
        break;
      case Stage::Response:
        respond(j);
        break;
    }
  }

  void start_processing(Job& j, const NodeProfile& executor) {
    j.t_dec = stage_time(j.program->decode_cost, executor);
    j.t_proc = stage_time(j.program->compute_cost, executor);
    schedule(j, EventKind::ComputeComplete, Stage::Process, now_ + (j.t_dec + j.t_proc));
  }

  void deliver(Job& j) {
    j.delivered_at = now_;
    emit("Delivered", "job=" + std::to_string(j.id) + " task=" + j.item.task_id +
                          " program=" + j.program->program_id +
                          " consumer=" + std::to_string(j.consumer));
    const NodeKind consumer_kind = sc_.nodes.at(j.consumer).kind;
    const bool remote_consumer = consumer_kind == NodeKind::GCS || consumer_kind == NodeKind::ECS;
    if (remote_consumer && !state_.timeline.moments.get(Moment::VirtualAwareness)) {
      set_moment(Moment::VirtualAwareness, now_,
                 std::string("rule=") + kVirtualAwarenessRule + " task=" + j.item.task_id +
                     " consumer=" + std::to_string(j.consumer));
    }
    if (j.local) {
      on_local_result(state_, j.program->program_id);
      j.completed_items = {j.item};
      finish(j);
    } else if (j.responded_at) {
      finish(j);
    }
  }

  void respond(Job& j) {
    UpdateResponse resp;
    resp.tick_index = j.key.tick;
    resp.server_id = j.key.server;
    resp.program_id = j.key.program;
    resp.result_payload = j.program->output_payload;
    resp.server_location = sc_.nodes.at(j.executor).location_at(now_);
    resp.completed_at = now_;
    ResponseOutcome outcome = on_response(state_, resp);
    j.responded_at = now_;
    j.completed_items = std::move(outcome.completed);
    emit("Response", "tick=" + std::to_string(resp.tick_index) +
                         " server=" + std::to_string(resp.server_id) +
                         " program=" + resp.program_id +
                         " location=" + fmt(resp.server_location));
    if (j.delivered_at) finish(j);
    advance();
  }

  void finish(Job& j) {
    if (j.finished) return;
    j.finished = true;
    ExecutionRecord rec;
    rec.task_id = j.item.task_id;
    rec.program_id = j.program->program_id;
    rec.tick = j.key.tick;
    rec.server_id = j.executor;
    rec.consumer = j.consumer;
    rec.local = j.local;
    rec.dispatched_at = j.dispatched;
    rec.delivered_at = *j.delivered_at;
    rec.completed_at = now_;
    rec.actual = LatencyBreakdown::from_terms(j.t_enc, j.t_comm, j.t_dec, j.t_proc);
    rec.predicted = j.predicted;
    metrics_.executions.push_back(rec);

    for (const auto& item : j.completed_items) {
      auto it = tasks_.find(item.task_id);
      if (it == tasks_.end()) continue;
      TaskState& ts = it->second;
      auto rem = ts.remaining.find(item.program_id);
      if (rem == ts.remaining.end() || rem->second == 0) continue;
      --rem->second;
      ts.record.servers.push_back(j.executor);
      const bool done = std::all_of(ts.remaining.begin(), ts.remaining.end(),
                                    [](const auto& kv) { return kv.second == 0; });
      if (done && !ts.record.completion_time) {
        ts.record.completion_time = now_;
        emit("TaskComplete", "task=" + item.task_id);
      }
    }
    if (j.local) advance();
  }

  void handle_timeout(std::uint64_t tick) {
    auto expired = on_timeout(state_, tick, now_);
    record_timeouts(expired, false);
    advance();
  }

  void record_timeouts(const std::vector<TimedOut>& expired, bool flush) {
    for (const auto& t : expired) {
      emit("Timeout", "tick=" + std::to_string(t.key.tick) + " server=" +
                          std::to_string(t.key.server) + " program=" + t.key.program +
                          " requeued=" + std::to_string(t.requeued.size()) +
                          (flush ? " flush=1" : ""));
      if (auto it = job_by_key_.find(t.key); it != job_by_key_.end()) {
        jobs_.at(it->second).cancelled = true;
      }
    }
  }

  void advance() {
    const std::uint64_t tick = state_.current_tick.value_or(0);
    AdvanceResult r = try_advance(state_, now_);
    if (!r.advanced()) return;
    emit("Advance", "tick=" + std::to_string(tick) + " from=" + std::to_string(r.from) +
                        " to=" + std::to_string(r.to) +
                        " phase=" + state_.timeline.current().phase_id);
    issue_implied_tasks(now_);
  }

  void finish_run() {
    now_ = end_;
    record_timeouts(flush_outstanding(state_), true);
    set_moment(Moment::Termination, end_);
    emit("End", "requests=" + std::to_string(state_.counters.request_entries) +
                    " responses=" + std::to_string(state_.counters.responses) +
                    " timeouts=" + std::to_string(state_.counters.timeouts) +
                    " cancelled_events=" + std::to_string(metrics_.cancelled_events) +
                    " t_pos=" + std::to_string(state_.timeline.t_pos));
  }

  const Scenario& sc_;
  std::uint64_t seed_;
  Network network_;
  ProtocolState state_;
  EventQueue queue_;
  double end_ = 0.0;
  double now_ = 0.0;
  std::uint64_t seq_ = 0;

  std::vector<Task> all_tasks_;
  std::vector<Task> due_;
  std::map<std::string, TaskState> tasks_;
  std::vector<std::string> task_order_;
  std::vector<Job> jobs_;
  std::map<OutstandingKey, std::uint64_t> job_by_key_;

  MetricsRecord metrics_;
  std::vector<std::string> trace_;
};

}  // namespace

RunResult run(const Scenario& scenario, std::optional<std::uint64_t> seed) {
  Simulation sim(scenario, seed.value_or(scenario.seed));
  return sim.execute();
}

}  // namespace birdsim

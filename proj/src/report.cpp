#include "birdsim/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "birdsim/error.hpp"

namespace birdsim {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string metrics_csv(const MetricsRecord& m) {
  std::ostringstream out;
  out << kMetricsHeader << "\n";
  for (const auto& r : m.executions) {
    out << r.task_id << ',' << r.program_id << ',' << r.tick << ',' << r.server_id << ','
        << r.consumer << ',' << (r.local ? 1 : 0) << ',' << format_number(r.dispatched_at) << ','
        << format_number(r.delivered_at) << ',' << format_number(r.completed_at) << ','
        << format_number(r.actual.t_enc) << ',' << format_number(r.actual.t_comm) << ','
        << format_number(r.actual.t_dec) << ',' << format_number(r.actual.t_proc) << ','
        << format_number(r.actual.t_e2e) << ','
        << to_string(classify_stream_latency(r.actual.t_e2e)) << ','
        << format_number(r.predicted.t_e2e) << "\n";
  }
  return out.str();
}

std::string tasks_csv(const MetricsRecord& m) {
  std::ostringstream out;
  out << kTasksHeader << "\n";
  for (const auto& t : m.tasks) {
    std::string servers;
    for (int s : t.servers) servers += (servers.empty() ? "" : ";") + std::to_string(s);
    out << t.task_id << ',' << to_string(t.origin) << ',' << format_number(t.issue_time) << ','
        << opt_number(t.completion_time) << ',' << (t.completion_time ? 1 : 0) << ',' << servers
        << "\n";
  }
  return out.str();
}

std::string link_samples_csv(const MetricsRecord& m) {
  std::ostringstream out;
  out << kLinkSamplesHeader << "\n";
  for (const auto& s : m.link_samples) {
    out << format_number(s.t) << ',' << to_string(s.direction) << ',' << to_string(s.band) << ','
        << format_number(s.throughput) << ',' << format_number(s.one_way_delay) << "\n";
  }
  return out.str();
}

std::string trace_text(const RunResult& r) {
  std::string out;
  for (const auto& line : r.trace) {
    out += line;
    out += '\n';
  }
  return out;
}

std::string summary_json(const RunResult& r, const std::string& scenario_name, std::uint64_t seed) {
  const MetricsRecord& m = r.metrics;
  nlohmann::json doc;
  doc["scenario"] = scenario_name;
  doc["seed"] = seed;
  doc["end_time"] = m.end_time;
  doc["tasks_total"] = m.tasks.size();
  doc["tasks_completed"] = m.tasks_completed();
  doc["executions"] = m.executions.size();
  doc["mean_t_e2e"] = opt_json(m.mean_t_e2e());
  doc["mean_t_comm"] = opt_json(m.mean_t_comm());
  doc["reported_to_virtual_awareness"] = opt_json(m.reported_to_virtual_awareness());
  doc["virtual_awareness_rule"] = kVirtualAwarenessRule;
  doc["final_t_pos"] = m.final_t_pos;
  doc["last_awareness"] = opt_json(m.last_awareness);
  nlohmann::json moments = nlohmann::json::object();
  for (Moment mo : kAllMoments) moments[to_string(mo)] = opt_json(m.moments.get(mo));
  doc["moments"] = moments;
  doc["counts"] = {
      {"ticks", m.counters.ticks},
      {"request_messages", m.counters.request_messages},
      {"requests", m.counters.request_entries},
      {"responses", m.counters.responses},
      {"timeouts", m.counters.timeouts},
      {"local_executions", m.counters.local_executions},
      {"unservable", m.counters.unservable},
      {"advances", m.counters.advances},
      {"lost_responses", m.lost_responses},
      {"cancelled_events", m.cancelled_events},
      {"link_samples", m.link_samples.size()},
  };
  return doc.dump(2) + "\n";
}

std::string summary_line(const MetricsRecord& m) {
  std::ostringstream out;
  out << "tasks completed " << m.tasks_completed() << "/" << m.tasks.size() << ", mean t_e2e ";
  if (auto v = m.mean_t_e2e()) out << format_number(*v) << " s"; else out << "n/a";
  out << ", reported->virtual_awareness ";
  if (auto v = m.reported_to_virtual_awareness()) out << format_number(*v) << " s"; else out << "n/a";
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

void write_run_artifacts(const RunResult& r, const std::string& scenario_name, std::uint64_t seed,
                         const std::filesystem::path& out_dir, OutputFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + out_dir.string() + "': " + ec.message());
  write_text_file(out_dir / "trace.log", trace_text(r));
  if (format != OutputFormat::Summary) {
    write_text_file(out_dir / "metrics.csv", metrics_csv(r.metrics));
    write_text_file(out_dir / "tasks.csv", tasks_csv(r.metrics));
    write_text_file(out_dir / "link_samples.csv", link_samples_csv(r.metrics));
  }
  if (format != OutputFormat::Csv) {
    write_text_file(out_dir / "summary.json", summary_json(r, scenario_name, seed));
  }
}

}  // namespace birdsim

#pragma once

#include <filesystem>
#include <string>

#include "birdsim/engine.hpp"

namespace birdsim {

// Column order of metrics.csv, one row per finished program execution.
inline constexpr const char* kMetricsHeader =
    "task_id,program_id,tick,server_id,consumer,local,dispatched_at,delivered_at,completed_at,"
    "t_enc,t_comm,t_dec,t_proc,t_e2e,latency_class,predicted_t_e2e";

// Column order of tasks.csv.
inline constexpr const char* kTasksHeader =
    "task_id,origin,issue_time,completion_time,completed,servers";

// Column order of link_samples.csv.
inline constexpr const char* kLinkSamplesHeader = "t,direction,band,throughput_mbps,one_way_delay_ms";

enum class OutputFormat { Csv, Summary, Both };

std::string metrics_csv(const MetricsRecord& m);
std::string tasks_csv(const MetricsRecord& m);
std::string link_samples_csv(const MetricsRecord& m);
std::string trace_text(const RunResult& r);

/// Structured summary as a JSON document with sorted keys.
std::string summary_json(const RunResult& r, const std::string& scenario_name, std::uint64_t seed);

/// tasks completed, mean t_e2e and reported -> virtual awareness on one line.
std::string summary_line(const MetricsRecord& m);

/// Writes trace.log plus metrics.csv/tasks.csv/link_samples.csv (Csv),
/// summary.json (Summary), or all of them (Both). Throws Io on failure.
void write_run_artifacts(const RunResult& r, const std::string& scenario_name, std::uint64_t seed,
                         const std::filesystem::path& out_dir, OutputFormat format);

void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Fixed-precision number formatting shared by every emitted table.
std::string format_number(double v);

}  // namespace birdsim

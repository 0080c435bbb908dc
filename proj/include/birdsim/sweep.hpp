#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "birdsim/scenario.hpp"

namespace birdsim {

enum class SweepParameter { UpdateInterval, PayloadScale, AltitudeProfile, LinkVarianceScale };

const char* to_string(SweepParameter p);
std::optional<SweepParameter> parse_sweep_parameter(std::string_view text);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::UpdateInterval;
  std::vector<double> values;
  std::size_t replicates = 1;
  std::uint64_t base_seed = 0;

  std::uint64_t replicate_seed(std::size_t replicate) const { return base_seed + replicate; }
};

/// JSON: {"parameter": "...", "values": [...], "replicates": N, "base_seed": S}.
SweepSpec parse_sweep_spec(std::string_view document);
SweepSpec load_sweep_spec(const std::filesystem::path& path);
void validate_sweep_spec(const SweepSpec& spec);

/// Copy of `base` with one parameter value applied. AltitudeProfile replaces
/// the flight plan with a steady hover at `value` meters.
Scenario apply_sweep_value(const Scenario& base, SweepParameter parameter, double value);

struct SweepRow {
  std::size_t value_index = 0;
  double value = 0.0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::size_t tasks_completed = 0;
  std::size_t executions = 0;
  std::optional<double> mean_t_e2e;
  std::optional<double> mean_t_comm;
  std::uint64_t requests = 0;
  std::uint64_t responses = 0;
  std::uint64_t timeouts = 0;
  std::optional<double> reported_to_virtual;
};

/// Mean/std over the replicates that produced a value. Std is the sample
/// standard deviation (n - 1), 0 for a single value.
struct Stat {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;
};

Stat summarize(const std::vector<double>& values);

struct SweepAggregate {
  double value = 0.0;
  std::size_t replicates = 0;
  Stat t_e2e;
  Stat t_comm;
  Stat tasks_completed;
  Stat timeouts;
  Stat reported_to_virtual;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepRow> rows;             // value-major, replicate-minor
  std::vector<SweepAggregate> aggregates;  // one per value, spec order
};

std::vector<SweepAggregate> aggregate(const SweepSpec& spec, const std::vector<SweepRow>& rows);

/// Runs every (value, replicate) pair, `threads` at a time (0 = hardware).
SweepResult run_sweep(const Scenario& base, const SweepSpec& spec, unsigned threads = 0);

inline constexpr const char* kSweepRowsHeader =
    "parameter,value,replicate,seed,tasks_completed,executions,mean_t_e2e,mean_t_comm,requests,"
    "responses,timeouts,reported_to_virtual_awareness";
inline constexpr const char* kSweepAggregateHeader =
    "parameter,value,replicates,mean_t_e2e,std_t_e2e,mean_t_comm,std_t_comm,"
    "mean_tasks_completed,std_tasks_completed,mean_timeouts,std_timeouts,"
    "mean_reported_to_virtual_awareness,std_reported_to_virtual_awareness";

std::string sweep_rows_csv(const SweepResult& r);
std::string sweep_aggregate_csv(const SweepResult& r);

/// Writes sweep_runs.csv and sweep_aggregate.csv.
void write_sweep_artifacts(const SweepResult& r, const std::filesystem::path& out_dir);

}  // namespace birdsim

#include "birdsim/birdsim.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "birdsim/channel.hpp"
#include "birdsim/engine.hpp"
#include "birdsim/error.hpp"
#include "birdsim/report.hpp"
#include "birdsim/scenario.hpp"
#include "birdsim/sweep.hpp"

struct birdsim_scenario {
  birdsim::Scenario value;
};

struct birdsim_result {
  birdsim::RunResult value;
  std::string scenario_name;
  std::uint64_t seed = 0;
};

namespace {

thread_local std::string g_last_error;

birdsim_status to_status(birdsim::ErrorCode code) {
  using birdsim::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return BIRDSIM_ERR_INVALID_ARGUMENT;
    case ErrorCode::OutOfMeasuredRange: return BIRDSIM_ERR_OUT_OF_MEASURED_RANGE;
    case ErrorCode::UnknownNode: return BIRDSIM_ERR_UNKNOWN_NODE;
    case ErrorCode::NoCapableServer: return BIRDSIM_ERR_NO_CAPABLE_SERVER;
    case ErrorCode::UnknownResponse: return BIRDSIM_ERR_UNKNOWN_RESPONSE;
    case ErrorCode::OrderingViolation: return BIRDSIM_ERR_ORDERING_VIOLATION;
    case ErrorCode::AlreadySet: return BIRDSIM_ERR_ALREADY_SET;
    case ErrorCode::SchemaError: return BIRDSIM_ERR_SCHEMA;
    case ErrorCode::DanglingReference: return BIRDSIM_ERR_DANGLING_REFERENCE;
    case ErrorCode::InvariantViolation: return BIRDSIM_ERR_INVARIANT_VIOLATION;
    case ErrorCode::Io: return BIRDSIM_ERR_IO;
    case ErrorCode::Runtime: return BIRDSIM_ERR_RUNTIME;
  }
  return BIRDSIM_ERR_RUNTIME;
}

template <typename F>
birdsim_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return BIRDSIM_OK;
  } catch (const birdsim::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BIRDSIM_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown failure";
    return BIRDSIM_ERR_RUNTIME;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) {
    throw birdsim::Error(birdsim::ErrorCode::InvalidArgument, std::string(what) + " is null");
  }
}

double or_nan(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

birdsim::LinkBand to_band(birdsim_band band) {
  switch (band) {
    case BIRDSIM_BAND_LOW_ALTITUDE: return birdsim::LinkBand::LowAltitude;
    case BIRDSIM_BAND_HIGH_ALTITUDE: return birdsim::LinkBand::HighAltitude;
    case BIRDSIM_BAND_ROTATION: return birdsim::LinkBand::Rotation;
  }
  throw birdsim::Error(birdsim::ErrorCode::InvalidArgument, "unknown band");
}

}  // namespace

extern "C" {

const char* birdsim_version(void) { return "0.1.0"; }

const char* birdsim_last_error(void) { return g_last_error.c_str(); }

const char* birdsim_status_name(birdsim_status status) {
  if (status == BIRDSIM_OK) return "Ok";
  if (status >= BIRDSIM_ERR_INVALID_ARGUMENT && status <= BIRDSIM_ERR_RUNTIME) {
    return birdsim::to_string(static_cast<birdsim::ErrorCode>(status - 1));
  }
  return "Unknown";
}

birdsim_status birdsim_scenario_load_file(const char* path, birdsim_scenario** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new birdsim_scenario{birdsim::load_scenario(path)};
  });
}

birdsim_status birdsim_scenario_load_string(const char* document, birdsim_scenario** out) {
  return guarded([&] {
    require(document, "document");
    require(out, "out");
    *out = new birdsim_scenario{birdsim::parse_scenario(document)};
  });
}

void birdsim_scenario_free(birdsim_scenario* scenario) { delete scenario; }

const char* birdsim_scenario_name(const birdsim_scenario* scenario) {
  return scenario ? scenario->value.name.c_str() : "";
}

uint64_t birdsim_scenario_seed(const birdsim_scenario* scenario) {
  return scenario ? scenario->value.seed : 0;
}

size_t birdsim_scenario_node_count(const birdsim_scenario* scenario) {
  return scenario ? scenario->value.nodes.size() : 0;
}

birdsim_status birdsim_run(const birdsim_scenario* scenario, int64_t seed_override,
                           birdsim_result** out) {
  return guarded([&] {
    require(scenario, "scenario");
    require(out, "out");
    const std::uint64_t seed =
        seed_override < 0 ? scenario->value.seed : static_cast<std::uint64_t>(seed_override);
    auto* result = new birdsim_result{birdsim::run(scenario->value, seed), scenario->value.name, seed};
    *out = result;
  });
}

void birdsim_result_free(birdsim_result* result) { delete result; }

birdsim_status birdsim_result_summary(const birdsim_result* result, birdsim_run_summary* out) {
  return guarded([&] {
    require(result, "result");
    require(out, "out");
    const auto& m = result->value.metrics;
    out->tasks_total = m.tasks.size();
    out->tasks_completed = m.tasks_completed();
    out->executions = m.executions.size();
    out->requests = m.counters.request_entries;
    out->responses = m.counters.responses;
    out->timeouts = m.counters.timeouts;
    out->mean_t_e2e = or_nan(m.mean_t_e2e());
    out->mean_t_comm = or_nan(m.mean_t_comm());
    out->reported_to_virtual = or_nan(m.reported_to_virtual_awareness());
    out->end_time = m.end_time;
    out->final_t_pos = m.final_t_pos;
  });
}

size_t birdsim_result_summary_line(const birdsim_result* result, char* buf, size_t len) {
  if (result == nullptr) return 0;
  const std::string line = birdsim::summary_line(result->value.metrics);
  if (buf != nullptr && len > 0) {
    const size_t n = std::min(len - 1, line.size());
    std::memcpy(buf, line.data(), n);
    buf[n] = '\0';
  }
  return line.size();
}

size_t birdsim_result_trace_lines(const birdsim_result* result) {
  return result ? result->value.trace.size() : 0;
}

const char* birdsim_result_trace_line(const birdsim_result* result, size_t index) {
  if (result == nullptr || index >= result->value.trace.size()) return nullptr;
  return result->value.trace[index].c_str();
}

birdsim_status birdsim_result_write(const birdsim_result* result, const char* out_dir,
                                    birdsim_format format) {
  return guarded([&] {
    require(result, "result");
    require(out_dir, "out_dir");
    birdsim::OutputFormat f = birdsim::OutputFormat::Both;
    if (format == BIRDSIM_FORMAT_CSV) f = birdsim::OutputFormat::Csv;
    else if (format == BIRDSIM_FORMAT_SUMMARY) f = birdsim::OutputFormat::Summary;
    else if (format != BIRDSIM_FORMAT_BOTH) {
      throw birdsim::Error(birdsim::ErrorCode::InvalidArgument, "unknown output format");
    }
    birdsim::write_run_artifacts(result->value, result->scenario_name, result->seed, out_dir, f);
  });
}

birdsim_status birdsim_sweep_file(const birdsim_scenario* scenario, const char* sweep_path,
                                  const char* out_dir, unsigned threads,
                                  birdsim_sweep_report* out) {
  return guarded([&] {
    require(scenario, "scenario");
    require(sweep_path, "sweep_path");
    require(out_dir, "out_dir");
    const birdsim::SweepSpec spec = birdsim::load_sweep_spec(sweep_path);
    const birdsim::SweepResult r = birdsim::run_sweep(scenario->value, spec, threads);
    birdsim::write_sweep_artifacts(r, out_dir);
    if (out != nullptr) {
      out->rows = r.rows.size();
      out->aggregate_rows = r.aggregates.size();
    }
  });
}

birdsim_status birdsim_default_band(birdsim_band band, birdsim_band_params* out) {
  return guarded([&] {
    require(out, "out");
    const auto params = birdsim::default_link_params();
    const auto& p = params[static_cast<std::size_t>(to_band(band))];
    *out = {p.dl_mean, p.ul_mean, p.rtt_mean, p.dl_std, p.ul_std};
  });
}

birdsim_status birdsim_band_for(double altitude, int rotating, birdsim_band* out) {
  return guarded([&] {
    require(out, "out");
    *out = static_cast<birdsim_band>(birdsim::band_for(altitude, rotating != 0));
  });
}

birdsim_status birdsim_parse_band(const char* text, birdsim_band* out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    auto band = birdsim::parse_link_band(text);
    if (!band) {
      throw birdsim::Error(birdsim::ErrorCode::InvalidArgument,
                           std::string("unknown band '") + text + "'");
    }
    *out = static_cast<birdsim_band>(*band);
  });
}

birdsim_status birdsim_feasibility(double bitrate_mbps, birdsim_band band,
                                   birdsim_feasibility_report* out) {
  return guarded([&] {
    require(out, "out");
    const auto r = birdsim::assess_uplink(bitrate_mbps, to_band(band), birdsim::default_link_params());
    *out = {r.bitrate, r.mean_uplink, r.headroom, r.sustainable ? 1 : 0};
  });
}

}  // extern "C"

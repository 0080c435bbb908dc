// Command-line front end. Talks to the simulator only through the C API.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "birdsim/birdsim.h"

namespace {

enum class LogLevel { Off, Info, Trace };

LogLevel log_level() {
  const char* env = std::getenv("BIRDSIM_LOG");
  if (env == nullptr) return LogLevel::Off;
  const std::string v = env;
  if (v == "trace") return LogLevel::Trace;
  if (v == "info") return LogLevel::Info;
  return LogLevel::Off;
}

// Load/validation problems exit 1, anything that breaks during a run exits 2.
int exit_code_for(birdsim_status status) {
  switch (status) {
    case BIRDSIM_OK: return 0;
    case BIRDSIM_ERR_SCHEMA:
    case BIRDSIM_ERR_DANGLING_REFERENCE:
    case BIRDSIM_ERR_INVARIANT_VIOLATION:
    case BIRDSIM_ERR_IO:
    case BIRDSIM_ERR_INVALID_ARGUMENT:
      return 1;
    default:
      return 2;
  }
}

int fail(birdsim_status status, const char* context) {
  std::fprintf(stderr, "birdsim: %s: %s (%s)\n", context, birdsim_last_error(),
               birdsim_status_name(status));
  return exit_code_for(status);
}

struct ScenarioHandle {
  birdsim_scenario* ptr = nullptr;
  ~ScenarioHandle() { birdsim_scenario_free(ptr); }
};

struct ResultHandle {
  birdsim_result* ptr = nullptr;
  ~ResultHandle() { birdsim_result_free(ptr); }
};

int cmd_feasibility(const std::string& spec) {
  const auto comma = spec.find(',');
  if (comma == std::string::npos) {
    std::fprintf(stderr, "birdsim: --feasibility expects \"BITRATE,BAND\"\n");
    return 1;
  }
  double bitrate = 0.0;
  try {
    std::size_t used = 0;
    bitrate = std::stod(spec.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    std::fprintf(stderr, "birdsim: invalid bitrate in '%s'\n", spec.c_str());
    return 1;
  }
  const std::string band_text = spec.substr(comma + 1);
  birdsim_band band{};
  if (auto s = birdsim_parse_band(band_text.c_str(), &band); s != BIRDSIM_OK) {
    return fail(s, "feasibility");
  }
  birdsim_feasibility_report report{};
  if (auto s = birdsim_feasibility(bitrate, band, &report); s != BIRDSIM_OK) {
    return fail(s, "feasibility");
  }
  std::printf("bitrate %.2f Mbps on %s: mean uplink %.2f Mbps, headroom %.2f Mbps -> %s\n",
              report.bitrate, band_text.c_str(), report.mean_uplink, report.headroom,
              report.sustainable ? "sustainable" : "unsustainable");
  return 0;
}

int cmd_run(const birdsim_scenario* scenario, std::optional<std::uint64_t> seed,
            const std::string& out_dir, birdsim_format format, LogLevel level) {
  ResultHandle result;
  const int64_t seed_arg = seed ? static_cast<int64_t>(*seed) : -1;
  if (auto s = birdsim_run(scenario, seed_arg, &result.ptr); s != BIRDSIM_OK) {
    return fail(s, "run aborted");
  }
  if (level == LogLevel::Trace) {
    const size_t n = birdsim_result_trace_lines(result.ptr);
    for (size_t i = 0; i < n; ++i) {
      std::fprintf(stderr, "%s\n", birdsim_result_trace_line(result.ptr, i));
    }
  }
  if (auto s = birdsim_result_write(result.ptr, out_dir.c_str(), format); s != BIRDSIM_OK) {
    return fail(s, "writing artifacts");
  }
  if (level != LogLevel::Off) std::fprintf(stderr, "birdsim: artifacts in %s\n", out_dir.c_str());
  const size_t need = birdsim_result_summary_line(result.ptr, nullptr, 0);
  std::string line(need + 1, '\0');
  birdsim_result_summary_line(result.ptr, line.data(), line.size());
  line.resize(need);
  std::printf("%s\n", line.c_str());
  return 0;
}

int cmd_sweep(const birdsim_scenario* scenario, const std::string& sweep_path,
              const std::string& out_dir, unsigned threads, LogLevel level) {
  birdsim_sweep_report report{};
  if (auto s = birdsim_sweep_file(scenario, sweep_path.c_str(), out_dir.c_str(), threads, &report);
      s != BIRDSIM_OK) {
    return fail(s, "sweep");
  }
  if (level != LogLevel::Off) std::fprintf(stderr, "birdsim: sweep tables in %s\n", out_dir.c_str());
  std::printf("sweep rows %llu, aggregate rows %llu\n",
              static_cast<unsigned long long>(report.rows),
              static_cast<unsigned long long>(report.aggregate_rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"birdsim: UAV-edge-cloud offloading mission simulator"};
  app.set_version_flag("--version", std::string(birdsim_version()));

  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::string format_text = "both";
  std::string sweep_path;
  std::string feasibility;
  unsigned threads = 0;

  app.add_option("--scenario", scenario_path, "Scenario file (JSON)");
  app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", format_text, "Artifacts to write")
      ->check(CLI::IsMember({"csv", "summary", "both"}))
      ->capture_default_str();
  app.add_option("--sweep", sweep_path, "Sweep specification file (JSON)");
  app.add_option("--feasibility", feasibility, "Check an uplink bitrate: \"BITRATE,BAND\"");
  app.add_option("--threads", threads, "Parallel sweep runs (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (!feasibility.empty()) return cmd_feasibility(feasibility);

  if (scenario_path.empty()) {
    std::fprintf(stderr, "birdsim: --scenario is required (or use --feasibility)\n");
    return 1;
  }
  const LogLevel level = log_level();
  ScenarioHandle scenario;
  if (auto s = birdsim_scenario_load_file(scenario_path.c_str(), &scenario.ptr); s != BIRDSIM_OK) {
    std::fprintf(stderr, "birdsim: %s: %s\n", scenario_path.c_str(), birdsim_last_error());
    return 1;
  }
  if (level != LogLevel::Off) {
    std::fprintf(stderr, "birdsim: loaded scenario '%s' (%zu nodes)\n",
                 birdsim_scenario_name(scenario.ptr), birdsim_scenario_node_count(scenario.ptr));
  }
  if (!sweep_path.empty()) return cmd_sweep(scenario.ptr, sweep_path, out_dir, threads, level);

  const birdsim_format format = format_text == "csv"       ? BIRDSIM_FORMAT_CSV
                                : format_text == "summary" ? BIRDSIM_FORMAT_SUMMARY
                                                           : BIRDSIM_FORMAT_BOTH;
  return cmd_run(scenario.ptr, seed, out_dir, format, level);
}

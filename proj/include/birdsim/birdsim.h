/*
 * birdsim C API.
 *
 * Objects are opaque handles created and released through this interface.
 * Every fallible call returns a birdsim_status; on failure a description is
 * available from birdsim_last_error() on the same thread until the next call.
 */
#ifndef BIRDSIM_BIRDSIM_H
#define BIRDSIM_BIRDSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BIRDSIM_BUILDING_LIBRARY)
#    define BIRDSIM_API __declspec(dllexport)
#  else
#    define BIRDSIM_API __declspec(dllimport)
#  endif
#else
#  define BIRDSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum birdsim_status {
  BIRDSIM_OK = 0,
  BIRDSIM_ERR_INVALID_ARGUMENT = 1,
  BIRDSIM_ERR_OUT_OF_MEASURED_RANGE = 2,
  BIRDSIM_ERR_UNKNOWN_NODE = 3,
  BIRDSIM_ERR_NO_CAPABLE_SERVER = 4,
  BIRDSIM_ERR_UNKNOWN_RESPONSE = 5,
  BIRDSIM_ERR_ORDERING_VIOLATION = 6,
  BIRDSIM_ERR_ALREADY_SET = 7,
  BIRDSIM_ERR_SCHEMA = 8,
  BIRDSIM_ERR_DANGLING_REFERENCE = 9,
  BIRDSIM_ERR_INVARIANT_VIOLATION = 10,
  BIRDSIM_ERR_IO = 11,
  BIRDSIM_ERR_RUNTIME = 12
} birdsim_status;

typedef enum birdsim_band {
  BIRDSIM_BAND_LOW_ALTITUDE = 0,
  BIRDSIM_BAND_HIGH_ALTITUDE = 1,
  BIRDSIM_BAND_ROTATION = 2
} birdsim_band;

typedef enum birdsim_format {
  BIRDSIM_FORMAT_CSV = 0,
  BIRDSIM_FORMAT_SUMMARY = 1,
  BIRDSIM_FORMAT_BOTH = 2
} birdsim_format;

typedef struct birdsim_scenario birdsim_scenario;
typedef struct birdsim_result birdsim_result;

typedef struct birdsim_run_summary {
  uint64_t tasks_total;
  uint64_t tasks_completed;
  uint64_t executions;
  uint64_t requests;
  uint64_t responses;
  uint64_t timeouts;
  double mean_t_e2e;               /* NaN when nothing executed */
  double mean_t_comm;              /* NaN when nothing executed */
  double reported_to_virtual;      /* NaN when virtual awareness never happened */
  double end_time;
  uint64_t final_t_pos;
} birdsim_run_summary;

typedef struct birdsim_band_params {
  double dl_mean;
  double ul_mean;
  double rtt_mean;
  double dl_std;
  double ul_std;
} birdsim_band_params;

typedef struct birdsim_feasibility_report {
  double bitrate;
  double mean_uplink;
  double headroom;
  int sustainable;
} birdsim_feasibility_report;

typedef struct birdsim_sweep_report {
  uint64_t rows;
  uint64_t aggregate_rows;
} birdsim_sweep_report;

BIRDSIM_API const char* birdsim_version(void);
BIRDSIM_API const char* birdsim_last_error(void);
BIRDSIM_API const char* birdsim_status_name(birdsim_status status);

BIRDSIM_API birdsim_status birdsim_scenario_load_file(const char* path, birdsim_scenario** out);
BIRDSIM_API birdsim_status birdsim_scenario_load_string(const char* document,
                                                        birdsim_scenario** out);
BIRDSIM_API void birdsim_scenario_free(birdsim_scenario* scenario);
BIRDSIM_API const char* birdsim_scenario_name(const birdsim_scenario* scenario);
BIRDSIM_API uint64_t birdsim_scenario_seed(const birdsim_scenario* scenario);
BIRDSIM_API size_t birdsim_scenario_node_count(const birdsim_scenario* scenario);

/* Runs the scenario; seed_override < 0 keeps the scenario's own seed. */
BIRDSIM_API birdsim_status birdsim_run(const birdsim_scenario* scenario, int64_t seed_override,
                                       birdsim_result** out);
BIRDSIM_API void birdsim_result_free(birdsim_result* result);
BIRDSIM_API birdsim_status birdsim_result_summary(const birdsim_result* result,
                                                  birdsim_run_summary* out);
/* Writes the one-line summary into buf (always NUL-terminated); returns the
 * full length needed excluding the terminator. */
BIRDSIM_API size_t birdsim_result_summary_line(const birdsim_result* result, char* buf,
                                               size_t len);
BIRDSIM_API size_t birdsim_result_trace_lines(const birdsim_result* result);
BIRDSIM_API const char* birdsim_result_trace_line(const birdsim_result* result, size_t index);
BIRDSIM_API birdsim_status birdsim_result_write(const birdsim_result* result, const char* out_dir,
                                                birdsim_format format);

BIRDSIM_API birdsim_status birdsim_sweep_file(const birdsim_scenario* scenario,
                                              const char* sweep_path, const char* out_dir,
                                              unsigned threads, birdsim_sweep_report* out);

BIRDSIM_API birdsim_status birdsim_default_band(birdsim_band band, birdsim_band_params* out);
BIRDSIM_API birdsim_status birdsim_band_for(double altitude, int rotating, birdsim_band* out);
BIRDSIM_API birdsim_status birdsim_parse_band(const char* text, birdsim_band* out);
BIRDSIM_API birdsim_status birdsim_feasibility(double bitrate_mbps, birdsim_band band,
                                               birdsim_feasibility_report* out);

#ifdef __cplusplus
}
#endif

#endif /* BIRDSIM_BIRDSIM_H */

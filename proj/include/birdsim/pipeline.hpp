#pragma once

#include "birdsim/channel.hpp"
#include "birdsim/core_model.hpp"

namespace birdsim {

struct PipelinePlacement {
  int source = 0;    // where the data originates
  int executor = 0;  // where processing runs
  int consumer = 0;  // where the result is used

  bool local() const { return source == executor && executor == consumer; }
};

/// End-to-end latency split into encode, communicate, decode and process.
/// `t_e2e` is always the sum of the four terms in that order.
struct LatencyBreakdown {
  double t_enc = 0.0;
  double t_comm = 0.0;
  double t_dec = 0.0;
  double t_proc = 0.0;
  double t_e2e = 0.0;

  static LatencyBreakdown from_terms(double enc, double comm, double dec, double proc) {
    return {enc, comm, dec, proc, enc + comm + dec + proc};
  }
};

double stage_time(double cost, const NodeProfile& node);

/// Predicted or realized latency of running `program` under `placement`.
/// Transfers are evaluated at time `t` with the given flight state.
LatencyBreakdown e2e_latency(const ProgramSpec& program, const PipelinePlacement& placement,
                             const NodeRegistry& nodes, const Network& network,
                             const FlightState& flight, double t = 0.0);

enum class LatencyClass { UltraLow, Low, NotLow };

const char* to_string(LatencyClass c);

/// Stream latency class: under 1 s is ultra-low, under 5 s is low.
LatencyClass classify_stream_latency(double t_e2e);

}  // namespace birdsim

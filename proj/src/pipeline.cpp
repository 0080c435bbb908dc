#include "birdsim/pipeline.hpp"

#include "birdsim/error.hpp"

namespace birdsim {

double stage_time(double cost, const NodeProfile& node) {
  if (!(node.compute_capacity > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "node " + std::to_string(node.node_id) + " has no compute capacity");
  }
  if (!(cost >= 0.0)) throw Error(ErrorCode::InvalidArgument, "cost must be >= 0");
  return cost / node.compute_capacity;
}

LatencyBreakdown e2e_latency(const ProgramSpec& program, const PipelinePlacement& placement,
                             const NodeRegistry& nodes, const Network& network,
                             const FlightState& flight, double t) {
  const NodeProfile& source = nodes.at(placement.source);
  const NodeProfile& executor = nodes.at(placement.executor);
  nodes.at(placement.consumer);

  const double proc = stage_time(program.compute_cost, executor);
  if (placement.local()) return LatencyBreakdown::from_terms(0.0, 0.0, 0.0, proc);

  const double enc = stage_time(program.encode_cost, source);
  const double dec = stage_time(program.decode_cost, executor);
  double comm = 0.0;
  if (placement.executor != placement.source) {
    comm += network.hop(placement.source, placement.executor, program.input_payload, t, flight)
                .seconds;
  }
  if (placement.consumer != placement.executor) {
    comm += network.hop(placement.executor, placement.consumer, program.output_payload, t, flight)
                .seconds;
  }
  return LatencyBreakdown::from_terms(enc, comm, dec, proc);
}

const char* to_string(LatencyClass c) {
  switch (c) {
    case LatencyClass::UltraLow: return "UltraLow";
    case LatencyClass::Low: return "Low";
    case LatencyClass::NotLow: return "NotLow";
  }
  return "?";
}

LatencyClass classify_stream_latency(double t_e2e) {
  if (!(t_e2e >= 0.0)) throw Error(ErrorCode::InvalidArgument, "latency must be >= 0");
  if (t_e2e < 1.0) return LatencyClass::UltraLow;
  if (t_e2e < 5.0) return LatencyClass::Low;
  return LatencyClass::NotLow;
}

}  // namespace birdsim

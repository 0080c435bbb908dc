#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "birdsim/channel.hpp"
#include "birdsim/core_model.hpp"
#include "birdsim/pipeline.hpp"

namespace birdsim {

/// One row of a server's program table.
struct ProgramTableEntry {
  int server_id = 0;
  std::string program_id;
  bool capable = false;
  double advertised_latency = 0.0;  // server's own decode + process estimate, seconds
};

using ProgramTables = std::vector<ProgramTableEntry>;

struct Candidate {
  int server_id = 0;
  std::optional<ProgramTableEntry> entry;  // empty when the UAV serves from its cache

  friend bool operator==(const Candidate& a, const Candidate& b) {
    return a.server_id == b.server_id;
  }
};

struct ProgramCandidates {
  std::string program_id;
  std::vector<Candidate> candidates;  // ascending server id
};

/// Capable servers for one program. The UAV (node 0) qualifies only through
/// its cache; table rows naming node 0 are ignored. May return an empty list.
std::vector<Candidate> candidates_for(const std::string& program_id, const ProgramTables& tables,
                                      const NodeRegistry& nodes);

/// Throws NoCapableServer naming the first program without candidates.
std::vector<ProgramCandidates> match_programs(const Task& task, const ProgramTables& tables,
                                              const NodeRegistry& nodes);

struct CandidatePrediction {
  int server_id = 0;
  LatencyBreakdown predicted;
  bool from_advertised = false;
};

/// Strict preference: lower t_e2e, then lower t_comm, then lower server id.
bool preferred(const CandidatePrediction& a, const CandidatePrediction& b);

/// Index of the preferred prediction; `predictions` must be non-empty.
std::size_t choose_best(std::span<const CandidatePrediction> predictions);

/// Predicts with the mean channel. Servers with a compute profile use the
/// pipeline model; servers known only from a table fall back to the
/// advertised latency for decode + process.
CandidatePrediction predict_candidate(const ProgramSpec& program, const Candidate& candidate,
                                      const NodeRegistry& nodes, const Network& network,
                                      const FlightState& flight, double t, int consumer = 0);

struct OffloadDecision {
  std::string program_id;
  int chosen_server = 0;
  LatencyBreakdown predicted;
  std::size_t candidates_considered = 0;
};

OffloadDecision select_server(const ProgramSpec& program, std::span<const Candidate> candidates,
                              const NodeRegistry& nodes, const Network& network,
                              const FlightState& flight, double t = 0.0, int consumer = 0);

}  // namespace birdsim

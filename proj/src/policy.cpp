#include "birdsim/policy.hpp"

#include <algorithm>

#include "birdsim/error.hpp"

namespace birdsim {

std::vector<Candidate> candidates_for(const std::string& program_id, const ProgramTables& tables,
                                      const NodeRegistry& nodes) {
  std::vector<Candidate> out;
  if (const auto* uav = nodes.find(0); uav != nullptr && uav->caches(program_id)) {
    out.push_back(Candidate{0, std::nullopt});
  }
  for (const auto& entry : tables) {
    if (entry.server_id == 0 || entry.program_id != program_id || !entry.capable) continue;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Candidate& c) {
      return c.server_id == entry.server_id;
    });
    if (!seen) out.push_back(Candidate{entry.server_id, entry});
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    return a.server_id < b.server_id;
  });
  return out;
}

std::vector<ProgramCandidates> match_programs(const Task& task, const ProgramTables& tables,
                                              const NodeRegistry& nodes) {
  std::vector<ProgramCandidates> out;
  out.reserve(task.required_programs.size());
  for (const auto& program_id : task.required_programs) {
    auto candidates = candidates_for(program_id, tables, nodes);
    if (candidates.empty()) {
      throw Error(ErrorCode::NoCapableServer,
                  "no capable server for program '" + program_id + "' of task " + task.task_id);
    }
    out.push_back({program_id, std::move(candidates)});
  }
  return out;
}

bool preferred(const CandidatePrediction& a, const CandidatePrediction& b) {
  if (a.predicted.t_e2e != b.predicted.t_e2e) return a.predicted.t_e2e < b.predicted.t_e2e;
  if (a.predicted.t_comm != b.predicted.t_comm) return a.predicted.t_comm < b.predicted.t_comm;
  return a.server_id < b.server_id;
}

std::size_t choose_best(std::span<const CandidatePrediction> predictions) {
  if (predictions.empty()) {
    throw Error(ErrorCode::InvalidArgument, "cannot choose among zero candidates");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < predictions.size(); ++i) {
    if (preferred(predictions[i], predictions[best])) best = i;
  }
  return best;
}

CandidatePrediction predict_candidate(const ProgramSpec& program, const Candidate& candidate,
                                      const NodeRegistry& nodes, const Network& network,
                                      const FlightState& flight, double t, int consumer) {
  const Network mean = network.mean_only();
  const PipelinePlacement placement{0, candidate.server_id, consumer};
  CandidatePrediction p;
  p.server_id = candidate.server_id;
  if (nodes.contains(candidate.server_id)) {
    p.predicted = e2e_latency(program, placement, nodes, mean, flight, t);
    return p;
  }
  if (!candidate.entry) {
    throw Error(ErrorCode::UnknownNode,
                "server " + std::to_string(candidate.server_id) + " has neither profile nor table");
  }
  const double enc = stage_time(program.encode_cost, nodes.at(0));
  double comm = mean.hop(0, candidate.server_id, program.input_payload, t, flight).seconds;
  if (consumer != candidate.server_id) {
    comm += mean.hop(candidate.server_id, consumer, program.output_payload, t, flight).seconds;
  }
  p.predicted = LatencyBreakdown::from_terms(enc, comm, 0.0, candidate.entry->advertised_latency);
  p.from_advertised = true;
  return p;
}

OffloadDecision select_server(const ProgramSpec& program, std::span<const Candidate> candidates,
                              const NodeRegistry& nodes, const Network& network,
                              const FlightState& flight, double t, int consumer) {
  if (candidates.empty()) {
    throw Error(ErrorCode::NoCapableServer,
                "no candidates for program '" + program.program_id + "'");
  }
  std::vector<CandidatePrediction> predictions;
  predictions.reserve(candidates.size());
  for (const auto& c : candidates) {
    predictions.push_back(predict_candidate(program, c, nodes, network, flight, t, consumer));
  }
  const auto& best = predictions[choose_best(predictions)];
  return {program.program_id, best.server_id, best.predicted, candidates.size()};
}

}  // namespace birdsim

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "birdsim/channel.hpp"
#include "birdsim/core_model.hpp"
#include "birdsim/policy.hpp"

namespace birdsim {

struct FlightWaypoint {
  double t = 0.0;
  double altitude = 0.0;
  bool rotating = false;
};

/// Incident clock values fed into the critical-moment record. Times are on
/// the mission clock, which starts at 0 together with the run.
struct IncidentScript {
  double start = 0.0;
  double observed = 0.0;
  double reported = 0.0;
  std::optional<double> truck_arrival;
};

/// Descriptive site data; not simulated.
struct SiteInfo {
  Vec3 origin;
  std::optional<double> range_volume_m3;
  std::optional<double> gnb_ground_distance_m;
  std::optional<double> gnb_height_m;
};

struct LinkConfig {
  BandTable bands = default_link_params();
  double variance_scale = 1.0;
  double floor_mbps = 1.0;
  double one_way_fraction = 0.5;
};

struct Scenario {
  std::string name;
  NodeRegistry nodes;
  LinkConfig link;
  GroundLink ground;
  std::map<int, double> loss_probability;  // per server, response loss
  std::map<std::string, ProgramSpec> programs;
  ProgramTables tables;
  std::vector<Task> tasks;
  std::vector<FlightWaypoint> flight_plan;  // ascending t
  std::vector<TimelinePhase> phases;
  double t_int = 1.0;
  double epoch = 0.0;  // time of the first update tick
  double duration = 0.0;
  std::uint64_t seed = 0;
  IncidentScript incident;
  SiteInfo site;

  Network network(std::uint64_t seed) const;
  /// Programs of a given kind, in id order.
  std::vector<std::string> programs_of_kind(const TaskKind& kind) const;
};

/// Parses a JSON scenario document. Throws SchemaError (with a JSON pointer
/// to the offending field), DanglingReference or InvariantViolation.
Scenario parse_scenario(std::string_view document);

/// Throws Io when the file cannot be read, then as parse_scenario.
Scenario load_scenario(const std::filesystem::path& path);

/// Cross-reference and invariant checks; parse_scenario calls this.
void validate_scenario(const Scenario& scenario);

/// Piecewise-linear altitude between waypoints; the rotating flag of the
/// segment's starting waypoint. Holds the first/last waypoint outside the plan.
FlightState flight_state_at(const Scenario& scenario, double t);

}  // namespace birdsim

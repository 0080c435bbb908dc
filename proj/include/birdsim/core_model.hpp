#pragma once

#include <array>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace birdsim {

/// Upper bound on UAV flight time before the ground crew arrives (20 min).
inline constexpr double kMaxBatteryBudgetSeconds = 1200.0;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

double distance(const Vec3& a, const Vec3& b);

enum class NodeKind { UAV5GP, ECS, GCS };

const char* to_string(NodeKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view text);

/// A mission participant. Node 0 is always the UAV platform; every other id
/// is an edge or ground computing server.
struct NodeProfile {
  int node_id = 0;
  NodeKind kind = NodeKind::UAV5GP;
  double compute_capacity = 1.0;  // work-units per second
  Vec3 location;
  Vec3 velocity;  // m/s, only meaningful when mobile
  bool mobile = false;
  std::set<std::string> cached_programs;
  std::optional<double> battery_budget;  // seconds, UAV only

  bool caches(const std::string& program_id) const {
    return cached_programs.count(program_id) != 0;
  }
  Vec3 location_at(double t) const;
};

// Default capability ladder: the ground station computes fastest, the edge
// station sits in the middle and the airborne platform is the weakest.
NodeProfile default_uav_profile();
NodeProfile default_ecs_profile(int node_id);
NodeProfile default_gcs_profile(int node_id);

struct ValidationResult {
  bool ok = true;
  std::string message;

  explicit operator bool() const { return ok; }
  static ValidationResult success() { return {}; }
  static ValidationResult failure(std::string why) { return {false, std::move(why)}; }
};

ValidationResult validate_node(const NodeProfile& profile);

/// Set-level checks: unique ids, exactly one node 0 and it is the UAV.
ValidationResult validate_nodes(std::span<const NodeProfile> nodes);

/// Id-indexed view over the scenario's nodes.
class NodeRegistry {
 public:
  NodeRegistry() = default;
  explicit NodeRegistry(std::vector<NodeProfile> nodes);

  const NodeProfile* find(int node_id) const;
  const NodeProfile& at(int node_id) const;  // throws UnknownNode
  bool contains(int node_id) const { return find(node_id) != nullptr; }

  const std::vector<NodeProfile>& all() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<NodeProfile> nodes_;  // sorted by node_id
};

struct TaskKind {
  enum class Tag { ObjectDetection, VRStitching, TrajectoryOptimization, Other };

  Tag tag = Tag::Other;
  std::string label;  // only used for Other

  std::string name() const;
  static TaskKind parse(std::string_view text);

  friend bool operator==(const TaskKind&, const TaskKind&) = default;
};

/// An offloadable program. Costs are in work-units, payloads in bits.
struct ProgramSpec {
  std::string program_id;
  TaskKind task_kind;
  double compute_cost = 0.0;
  double input_payload = 0.0;
  double output_payload = 0.0;
  double encode_cost = 0.0;
  double decode_cost = 0.0;
};

ValidationResult validate_program(const ProgramSpec& program);

enum class TaskOrigin { CommanderOrder, TimelineImplied };

const char* to_string(TaskOrigin origin);

struct Task {
  std::string task_id;
  std::vector<std::string> required_programs;
  TaskOrigin origin = TaskOrigin::CommanderOrder;
  double issue_time = 0.0;
  int consumer = 0;  // node that uses the results
};

enum class Moment {
  Start,
  Observed,
  Reported,
  VirtualAwareness,
  PhysicalAwareness,
  Termination,
};

inline constexpr std::array<Moment, 6> kAllMoments = {
    Moment::Start,          Moment::Observed,          Moment::Reported,
    Moment::VirtualAwareness, Moment::PhysicalAwareness, Moment::Termination};

const char* to_string(Moment moment);

/// Timestamps of the incident's critical moments. Ordering, where both ends
/// are set: start <= observed <= reported <= {virtual, physical} <= termination.
/// Virtual and physical awareness are not ordered against each other.
struct CriticalMoments {
  std::array<std::optional<double>, 6> at;

  const std::optional<double>& get(Moment m) const {
    return at[static_cast<std::size_t>(m)];
  }
  std::optional<double>& get(Moment m) { return at[static_cast<std::size_t>(m)]; }

  bool ordered() const;
};

/// Throws AlreadySet, OrderingViolation, or InvalidArgument for t < 0.
CriticalMoments record_moment(CriticalMoments moments, Moment which, double t);

/// Only meaningful for pairs the ordering relates.
bool must_precede(Moment earlier, Moment later);

struct ImpliedTask {
  TaskKind task_kind;
  int consumer = 0;
};

struct TimelinePhase {
  std::string phase_id;
  std::vector<ImpliedTask> implied;
  // Phase is complete once every listed program has produced a result while
  // the phase was current. An empty list never completes.
  std::vector<std::string> complete_when;
};

struct MissionTimeline {
  std::vector<TimelinePhase> phases;
  std::size_t t_pos = 0;
  CriticalMoments moments;

  const TimelinePhase& current() const { return phases.at(t_pos); }
  bool at_last_phase() const { return t_pos + 1 >= phases.size(); }
};

}  // namespace birdsim

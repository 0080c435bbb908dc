#include "birdsim/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "birdsim/error.hpp"

namespace birdsim {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfMeasuredRange: return "OutOfMeasuredRange";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::NoCapableServer: return "NoCapableServer";
    case ErrorCode::UnknownResponse: return "UnknownResponse";
    case ErrorCode::OrderingViolation: return "OrderingViolation";
    case ErrorCode::AlreadySet: return "AlreadySet";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Runtime: return "Runtime";
  }
  return "Unknown";
}

double distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::UAV5GP: return "UAV5GP";
    case NodeKind::ECS: return "ECS";
    case NodeKind::GCS: return "GCS";
  }
  return "?";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
  if (text == "UAV5GP") return NodeKind::UAV5GP;
  if (text == "ECS") return NodeKind::ECS;
  if (text == "GCS") return NodeKind::GCS;
  return std::nullopt;
}

Vec3 NodeProfile::location_at(double t) const {
  if (!mobile) return location;
  return {location.x + velocity.x * t, location.y + velocity.y * t,
          location.z + velocity.z * t};
}

NodeProfile default_uav_profile() {
  NodeProfile p;
  p.node_id = 0;
  p.kind = NodeKind::UAV5GP;
  p.compute_capacity = 10.0;
  p.mobile = true;
  p.battery_budget = kMaxBatteryBudgetSeconds;
  return p;
}

NodeProfile default_ecs_profile(int node_id) {
  NodeProfile p;
  p.node_id = node_id;
  p.kind = NodeKind::ECS;
  p.compute_capacity = 40.0;
  p.mobile = true;
  return p;
}

NodeProfile default_gcs_profile(int node_id) {
  NodeProfile p;
  p.node_id = node_id;
  p.kind = NodeKind::GCS;
  p.compute_capacity = 160.0;
  p.mobile = false;
  return p;
}

ValidationResult validate_node(const NodeProfile& profile) {
  if (profile.node_id < 0) {
    return ValidationResult::failure("node_id must be >= 0");
  }
  if (!(profile.compute_capacity > 0.0) || !std::isfinite(profile.compute_capacity)) {
    return ValidationResult::failure("compute_capacity must be a positive finite number");
  }
  if (profile.node_id == 0 && profile.kind != NodeKind::UAV5GP) {
    return ValidationResult::failure("node 0 must be the UAV5GP");
  }
  if (profile.kind == NodeKind::UAV5GP) {
    if (profile.node_id != 0) {
      return ValidationResult::failure("the UAV5GP must have node_id 0");
    }
    if (!profile.battery_budget) {
      return ValidationResult::failure("UAV5GP requires a battery_budget");
    }
    const double budget = *profile.battery_budget;
    if (!(budget >= 0.0)) {
      return ValidationResult::failure("battery_budget must be >= 0");
    }
    if (budget > kMaxBatteryBudgetSeconds) {
      return ValidationResult::failure("battery_budget exceeds pre-arrival budget of 1200 s");
    }
  } else if (profile.battery_budget) {
    return ValidationResult::failure("battery_budget is only valid for the UAV5GP");
  }
  return ValidationResult::success();
}

ValidationResult validate_nodes(std::span<const NodeProfile> nodes) {
  std::set<int> seen;
  int zero_count = 0;
  for (const auto& node : nodes) {
    if (auto r = validate_node(node); !r) {
      return ValidationResult::failure("node " + std::to_string(node.node_id) + ": " + r.message);
    }
    if (!seen.insert(node.node_id).second) {
      return ValidationResult::failure("duplicate node_id " + std::to_string(node.node_id));
    }
    if (node.node_id == 0) ++zero_count;
  }
  if (zero_count != 1) {
    return ValidationResult::failure("exactly one node must have node_id 0");
  }
  return ValidationResult::success();
}

NodeRegistry::NodeRegistry(std::vector<NodeProfile> nodes) : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end(),
            [](const NodeProfile& a, const NodeProfile& b) { return a.node_id < b.node_id; });
}

const NodeProfile* NodeRegistry::find(int node_id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), node_id,
                             [](const NodeProfile& n, int id) { return n.node_id < id; });
  if (it == nodes_.end() || it->node_id != node_id) return nullptr;
  return &*it;
}

const NodeProfile& NodeRegistry::at(int node_id) const {
  if (const auto* node = find(node_id)) return *node;
  throw Error(ErrorCode::UnknownNode, "unknown node " + std::to_string(node_id));
}

std::string TaskKind::name() const {
  switch (tag) {
    case Tag::ObjectDetection: return "ObjectDetection";
    case Tag::VRStitching: return "VRStitching";
    case Tag::TrajectoryOptimization: return "TrajectoryOptimization";
    case Tag::Other: return label.empty() ? "Other" : label;
  }
  return label;
}

TaskKind TaskKind::parse(std::string_view text) {
  if (text == "ObjectDetection") return {Tag::ObjectDetection, {}};
  if (text == "VRStitching") return {Tag::VRStitching, {}};
  if (text == "TrajectoryOptimization") return {Tag::TrajectoryOptimization, {}};
  return {Tag::Other, std::string(text)};
}

ValidationResult validate_program(const ProgramSpec& program) {
  if (program.program_id.empty()) {
    return ValidationResult::failure("program_id must not be empty");
  }
  const std::array<std::pair<const char*, double>, 5> fields = {{
      {"compute_cost", program.compute_cost},
      {"input_payload", program.input_payload},
      {"output_payload", program.output_payload},
      {"encode_cost", program.encode_cost},
      {"decode_cost", program.decode_cost},
  }};
  for (const auto& [name, value] : fields) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      return ValidationResult::failure(std::string(name) + " must be a finite value >= 0");
    }
  }
  return ValidationResult::success();
}

const char* to_string(TaskOrigin origin) {
  return origin == TaskOrigin::CommanderOrder ? "CommanderOrder" : "TimelineImplied";
}

const char* to_string(Moment moment) {
  switch (moment) {
    case Moment::Start: return "start";
    case Moment::Observed: return "observed";
    case Moment::Reported: return "reported";
    case Moment::VirtualAwareness: return "virtual_awareness";
    case Moment::PhysicalAwareness: return "physical_awareness";
    case Moment::Termination: return "termination";
  }
  return "?";
}

namespace {

// Position in the chain start < observed < reported < awareness < termination.
int chain_rank(Moment m) {
  switch (m) {
    case Moment::Start: return 0;
    case Moment::Observed: return 1;
    case Moment::Reported: return 2;
    case Moment::VirtualAwareness:
    case Moment::PhysicalAwareness: return 3;
    case Moment::Termination: return 4;
  }
  return 0;
}

}  // namespace

bool must_precede(Moment earlier, Moment later) {
  return chain_rank(earlier) < chain_rank(later);
}

bool CriticalMoments::ordered() const {
  for (Moment a : kAllMoments) {
    for (Moment b : kAllMoments) {
      if (!must_precede(a, b)) continue;
      const auto& ta = get(a);
      const auto& tb = get(b);
      if (ta && tb && *ta > *tb) return false;
    }
  }
  return true;
}

CriticalMoments record_moment(CriticalMoments moments, Moment which, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("moment ") + to_string(which) + " must be a finite time >= 0");
  }
  if (moments.get(which)) {
    throw Error(ErrorCode::AlreadySet, std::string("moment ") + to_string(which) + " already set");
  }
  for (Moment other : kAllMoments) {
    const auto& other_t = moments.get(other);
    if (!other_t) continue;
    const bool violates = (must_precede(other, which) && *other_t > t) ||
                          (must_precede(which, other) && t > *other_t);
    if (violates) {
      std::ostringstream msg;
      msg << to_string(which) << "=" << t << " conflicts with " << to_string(other) << "="
          << *other_t;
      throw Error(ErrorCode::OrderingViolation, msg.str());
    }
  }
  moments.get(which) = t;
  return moments;
}

}  // namespace birdsim

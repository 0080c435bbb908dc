#include "birdsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "birdsim/error.hpp"

namespace birdsim {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, (path.empty() ? std::string("/") : path) + ": " + what);
}

[[noreturn]] void dangling(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::DanglingReference, path + ": " + what);
}

[[noreturn]] void violation(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::InvariantViolation, (path.empty() ? std::string("/") : path) + ": " + what);
}

// Field access that remembers where it is in the document.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return value_; }

  bool has(const char* key) const { return value_.contains(key) && !value_.at(key).is_null(); }

  Node child(const char* key) const {
    if (!has(key)) schema_error(path_ + "/" + key, "missing required field");
    return Node(value_.at(key), path_ + "/" + key);
  }

  Node object(const char* key) const {
    Node c = child(key);
    if (!c.value_.is_object()) schema_error(c.path_, "expected an object");
    return c;
  }

  std::vector<Node> array(const char* key) const {
    Node c = child(key);
    if (!c.value_.is_array()) schema_error(c.path_, "expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < c.value_.size(); ++i) {
      out.emplace_back(c.value_[i], c.path_ + "/" + std::to_string(i));
    }
    return out;
  }

  std::vector<Node> opt_array(const char* key) const {
    return has(key) ? array(key) : std::vector<Node>{};
  }

  double number() const {
    if (!value_.is_number()) schema_error(path_, "expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) schema_error(path_, "expected a finite number");
    return v;
  }
  double number(const char* key) const { return child(key).number(); }
  double number(const char* key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::optional<double> opt_number(const char* key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::int64_t integer(const char* key) const {
    Node c = child(key);
    if (!c.value_.is_number_integer()) schema_error(c.path_, "expected an integer");
    return c.value_.get<std::int64_t>();
  }

  std::string string() const {
    if (!value_.is_string()) schema_error(path_, "expected a string");
    return value_.get<std::string>();
  }
  std::string string(const char* key) const { return child(key).string(); }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    Node c = child(key);
    if (!c.value_.is_boolean()) schema_error(c.path_, "expected true or false");
    return c.value_.get<bool>();
  }

  Vec3 vec3(const char* key, Vec3 fallback) const {
    if (!has(key)) return fallback;
    auto items = array(key);
    if (items.size() != 3) schema_error(path_ + "/" + key, "expected [x, y, z]");
    return {items[0].number(), items[1].number(), items[2].number()};
  }

  std::vector<std::string> strings(const char* key) const {
    std::vector<std::string> out;
    for (const auto& item : opt_array(key)) out.push_back(item.string());
    return out;
  }

 private:
  const json& value_;
  std::string path_;
};

NodeProfile read_node(const Node& n) {
  NodeProfile p;
  const auto id = n.integer("id");
  if (id < 0 || id > 1'000'000) schema_error(n.path() + "/id", "node id out of range");
  p.node_id = static_cast<int>(id);
  const std::string kind = n.string("kind");
  auto parsed = parse_node_kind(kind);
  if (!parsed) schema_error(n.path() + "/kind", "unknown node kind '" + kind + "'");
  p.kind = *parsed;
  p.compute_capacity = n.number("compute_capacity");
  p.location = n.vec3("location", {});
  p.velocity = n.vec3("velocity", {});
  p.mobile = n.boolean("mobile", p.kind != NodeKind::GCS);
  for (auto& program : n.strings("cached_programs")) p.cached_programs.insert(program);
  p.battery_budget = n.opt_number("battery_budget");
  if (p.kind == NodeKind::UAV5GP && !p.battery_budget) p.battery_budget = kMaxBatteryBudgetSeconds;
  return p;
}

void read_band_override(const Node& n, LinkBandParams& band) {
  band.dl_mean = n.number("dl_mean", band.dl_mean);
  band.ul_mean = n.number("ul_mean", band.ul_mean);
  band.rtt_mean = n.number("rtt_mean", band.rtt_mean);
  band.dl_std = n.number("dl_std", band.dl_std);
  band.ul_std = n.number("ul_std", band.ul_std);
}

LinkConfig read_link(const Node& n) {
  LinkConfig cfg;
  if (n.has("bands")) {
    Node bands = n.object("bands");
    for (auto it = bands.raw().begin(); it != bands.raw().end(); ++it) {
      auto band = parse_link_band(it.key());
      const std::string path = bands.path() + "/" + it.key();
      if (!band) schema_error(path, "unknown band");
      if (!it.value().is_object()) schema_error(path, "expected an object");
      read_band_override(Node(it.value(), path), cfg.bands[static_cast<std::size_t>(*band)]);
    }
  }
  cfg.variance_scale = n.number("variance_scale", cfg.variance_scale);
  cfg.floor_mbps = n.number("floor_mbps", cfg.floor_mbps);
  cfg.one_way_fraction = n.number("one_way_fraction", cfg.one_way_fraction);
  return cfg;
}

ProgramSpec read_program(const Node& n) {
  ProgramSpec p;
  p.program_id = n.string("id");
  p.task_kind = TaskKind::parse(n.string("task_kind"));
  p.compute_cost = n.number("compute_cost");
  p.input_payload = n.number("input_payload");
  p.output_payload = n.number("output_payload");
  p.encode_cost = n.number("encode_cost", 0.0);
  p.decode_cost = n.number("decode_cost", 0.0);
  return p;
}

Task read_task(const Node& n) {
  Task t;
  t.task_id = n.string("id");
  t.required_programs = n.strings("programs");
  const std::string origin = n.has("origin") ? n.string("origin") : "CommanderOrder";
  if (origin == "CommanderOrder") {
    t.origin = TaskOrigin::CommanderOrder;
  } else if (origin == "TimelineImplied") {
    t.origin = TaskOrigin::TimelineImplied;
  } else {
    schema_error(n.path() + "/origin", "unknown origin '" + origin + "'");
  }
  t.issue_time = n.number("issue_time");
  t.consumer = n.has("consumer") ? static_cast<int>(n.integer("consumer")) : 0;
  return t;
}

TimelinePhase read_phase(const Node& n) {
  TimelinePhase phase;
  phase.phase_id = n.string("id");
  for (const auto& implied : n.opt_array("implied_tasks")) {
    ImpliedTask it;
    it.task_kind = TaskKind::parse(implied.string("task_kind"));
    it.consumer = implied.has("consumer") ? static_cast<int>(implied.integer("consumer")) : 0;
    phase.implied.push_back(it);
  }
  phase.complete_when = n.strings("complete_when");
  return phase;
}

}  // namespace

Network Scenario::network(std::uint64_t noise_seed) const {
  LinkModel uav(link.bands, noise_seed, 0);
  uav.set_variance_scale(link.variance_scale);
  uav.set_floor_mbps(link.floor_mbps);
  uav.set_one_way_fraction(link.one_way_fraction);
  return {uav, ground};
}

std::vector<std::string> Scenario::programs_of_kind(const TaskKind& kind) const {
  std::vector<std::string> out;
  for (const auto& [id, program] : programs) {
    if (program.task_kind == kind) out.push_back(id);
  }
  return out;
}

Scenario parse_scenario(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("/: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("", "scenario must be a JSON object");
  const Node root(doc, "");

  Scenario s;
  s.name = root.string("name");
  if (root.has("seed")) {
    Node seed = root.child("seed");
    if (!seed.raw().is_number_unsigned() && !seed.raw().is_number_integer()) {
      schema_error(seed.path(), "expected a non-negative integer");
    }
    if (seed.raw().is_number_integer() && seed.raw().get<std::int64_t>() < 0) {
      schema_error(seed.path(), "expected a non-negative integer");
    }
    s.seed = seed.raw().get<std::uint64_t>();
  }
  s.t_int = root.number("t_int", 1.0);
  s.epoch = root.number("epoch", 0.0);
  s.duration = root.number("duration");

  if (root.has("site")) {
    Node site = root.object("site");
    s.site.origin = site.vec3("origin", {});
    s.site.range_volume_m3 = site.opt_number("range_volume_m3");
    s.site.gnb_ground_distance_m = site.opt_number("gnb_ground_distance_m");
    s.site.gnb_height_m = site.opt_number("gnb_height_m");
  }

  std::vector<NodeProfile> nodes;
  for (const auto& n : root.array("nodes")) nodes.push_back(read_node(n));
  if (auto r = validate_nodes(nodes); !r) violation("/nodes", r.message);
  s.nodes = NodeRegistry(std::move(nodes));

  if (root.has("link")) s.link = read_link(root.object("link"));
  if (root.has("ground_link")) {
    Node g = root.object("ground_link");
    s.ground.throughput_mbps = g.number("throughput_mbps", s.ground.throughput_mbps);
    s.ground.one_way_delay_ms = g.number("one_way_delay_ms", s.ground.one_way_delay_ms);
  }
  for (const auto& l : root.opt_array("loss")) {
    const int server = static_cast<int>(l.integer("server"));
    s.loss_probability[server] = l.number("probability");
  }

  for (const auto& n : root.array("programs")) {
    ProgramSpec p = read_program(n);
    if (auto r = validate_program(p); !r) violation(n.path(), r.message);
    if (!s.programs.emplace(p.program_id, p).second) {
      violation(n.path() + "/id", "duplicate program id '" + p.program_id + "'");
    }
  }
  for (const auto& n : root.opt_array("tables")) {
    ProgramTableEntry e;
    e.server_id = static_cast<int>(n.integer("server_id"));
    e.program_id = n.string("program_id");
    e.capable = n.boolean("capable", true);
    e.advertised_latency = n.number("advertised_latency", 0.0);
    s.tables.push_back(e);
  }
  for (const auto& n : root.opt_array("tasks")) s.tasks.push_back(read_task(n));
  for (const auto& n : root.array("flight_plan")) {
    s.flight_plan.push_back({n.number("t"), n.number("altitude"), n.boolean("rotating", false)});
  }
  if (root.has("timeline")) {
    for (const auto& n : root.array("timeline")) s.phases.push_back(read_phase(n));
  } else {
    s.phases.push_back(TimelinePhase{"mission", {}, {}});
  }

  Node incident = root.object("incident");
  s.incident.start = incident.number("start");
  s.incident.observed = incident.number("observed");
  s.incident.reported = incident.number("reported");
  s.incident.truck_arrival = incident.opt_number("truck_arrival");

  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open scenario file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_scenario(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void validate_scenario(const Scenario& s) {
  if (s.name.empty()) violation("/name", "must not be empty");
  if (!(s.t_int > 0.0)) violation("/t_int", "must be > 0");
  if (!(s.duration > 0.0)) violation("/duration", "must be > 0");
  if (!(s.epoch >= 0.0 && s.epoch < s.duration)) violation("/epoch", "must lie in [0, duration)");

  if (auto r = validate_nodes(s.nodes.all()); !r) violation("/nodes", r.message);
  const NodeProfile& uav = s.nodes.at(0);
  if (s.duration > uav.battery_budget.value_or(kMaxBatteryBudgetSeconds)) {
    violation("/duration", "exceeds the UAV battery budget");
  }
  for (const auto& node : s.nodes.all()) {
    for (const auto& program : node.cached_programs) {
      if (s.programs.count(program) == 0) {
        dangling("/nodes", "node " + std::to_string(node.node_id) + " caches unknown program '" +
                               program + "'");
      }
    }
  }

  try {
    (void)s.network(s.seed);
  } catch (const Error& e) {
    violation("/link", e.what());
  }
  if (!(s.ground.throughput_mbps > 0.0 && s.ground.one_way_delay_ms >= 0.0)) {
    violation("/ground_link", "throughput must be > 0 and delay >= 0");
  }
  for (const auto& [server, p] : s.loss_probability) {
    if (server == 0 || !s.nodes.contains(server)) {
      dangling("/loss", "loss configured for unknown server " + std::to_string(server));
    }
    if (!(p >= 0.0 && p <= 1.0)) violation("/loss", "probability must be in [0, 1]");
  }

  for (std::size_t i = 0; i < s.tables.size(); ++i) {
    const auto& e = s.tables[i];
    const std::string path = "/tables/" + std::to_string(i);
    if (!s.nodes.contains(e.server_id)) {
      dangling(path + "/server_id", "unknown server " + std::to_string(e.server_id));
    }
    if (s.programs.count(e.program_id) == 0) {
      dangling(path + "/program_id", "unknown program '" + e.program_id + "'");
    }
    if (!(e.advertised_latency >= 0.0)) violation(path, "advertised_latency must be >= 0");
  }

  std::set<std::string> task_ids;
  for (std::size_t i = 0; i < s.tasks.size(); ++i) {
    const auto& t = s.tasks[i];
    const std::string path = "/tasks/" + std::to_string(i);
    if (!task_ids.insert(t.task_id).second) violation(path + "/id", "duplicate task id");
    if (t.required_programs.empty()) violation(path + "/programs", "must not be empty");
    for (const auto& p : t.required_programs) {
      if (s.programs.count(p) == 0) dangling(path + "/programs", "unknown program '" + p + "'");
    }
    if (!s.nodes.contains(t.consumer)) {
      dangling(path + "/consumer", "unknown node " + std::to_string(t.consumer));
    }
    if (!(t.issue_time >= 0.0)) violation(path + "/issue_time", "must be >= 0");
  }

  if (s.phases.empty()) violation("/timeline", "needs at least one phase");
  std::set<std::string> phase_ids;
  for (std::size_t i = 0; i < s.phases.size(); ++i) {
    const auto& phase = s.phases[i];
    const std::string path = "/timeline/" + std::to_string(i);
    if (!phase_ids.insert(phase.phase_id).second) violation(path + "/id", "duplicate phase id");
    for (const auto& p : phase.complete_when) {
      if (s.programs.count(p) == 0) dangling(path + "/complete_when", "unknown program '" + p + "'");
    }
    for (const auto& implied : phase.implied) {
      if (s.programs_of_kind(implied.task_kind).empty()) {
        dangling(path + "/implied_tasks", "no program of kind " + implied.task_kind.name());
      }
      if (!s.nodes.contains(implied.consumer)) {
        dangling(path + "/implied_tasks", "unknown consumer " + std::to_string(implied.consumer));
      }
    }
  }

  if (s.flight_plan.empty()) violation("/flight_plan", "needs at least one waypoint");
  for (std::size_t i = 0; i < s.flight_plan.size(); ++i) {
    const auto& wp = s.flight_plan[i];
    const std::string path = "/flight_plan/" + std::to_string(i);
    if (!(wp.altitude >= 0.0 && wp.altitude <= kMaxMeasuredAltitude)) {
      std::ostringstream msg;
      msg << "altitude " << wp.altitude << " m outside the measured range [0, 100] m";
      violation(path + "/altitude", msg.str());
    }
    if (!(wp.t >= 0.0)) violation(path + "/t", "must be >= 0");
    if (i > 0 && !(wp.t > s.flight_plan[i - 1].t)) {
      violation(path + "/t", "waypoint times must be strictly increasing");
    }
  }

  const auto& inc = s.incident;
  if (!(inc.start >= 0.0 && inc.start <= inc.observed && inc.observed <= inc.reported)) {
    violation("/incident", "requires 0 <= start <= observed <= reported");
  }
  if (s.epoch < inc.reported) violation("/epoch", "the mission cannot begin before the report");
  if (inc.truck_arrival && !(*inc.truck_arrival >= inc.reported)) {
    violation("/incident/truck_arrival", "must not precede the report");
  }
}

FlightState flight_state_at(const Scenario& scenario, double t) {
  const auto& plan = scenario.flight_plan;
  if (plan.empty()) return {};
  if (t <= plan.front().t) return {plan.front().altitude, plan.front().rotating};
  if (t >= plan.back().t) return {plan.back().altitude, plan.back().rotating};
  auto next = std::upper_bound(plan.begin(), plan.end(), t,
                               [](double v, const FlightWaypoint& wp) { return v < wp.t; });
  const auto& b = *next;
  const auto& a = *(next - 1);
  const double frac = (t - a.t) / (b.t - a.t);
  return {a.altitude + (b.altitude - a.altitude) * frac, a.rotating};
}

}  // namespace birdsim

#pragma once

// Shared fixtures and independent oracles for the test binaries. The oracles
// recompute expected values from first principles instead of calling the
// library routine under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "birdsim/channel.hpp"
#include "birdsim/core_model.hpp"
#include "birdsim/engine.hpp"
#include "birdsim/pipeline.hpp"
#include "birdsim/policy.hpp"
#include "birdsim/scenario.hpp"

#ifndef BIRDSIM_SCENARIO_DIR
#define BIRDSIM_SCENARIO_DIR "scenarios"
#endif
#ifndef BIRDSIM_GOLDEN_DIR
#define BIRDSIM_GOLDEN_DIR "tests/golden"
#endif

namespace testing {

inline std::string scenario_path(const std::string& name) {
  return std::string(BIRDSIM_SCENARIO_DIR) + "/" + name;
}

inline birdsim::NodeRegistry default_nodes() {
  return birdsim::NodeRegistry({birdsim::default_uav_profile(), birdsim::default_ecs_profile(1),
                                birdsim::default_gcs_profile(2)});
}

inline birdsim::Network quiet_network(std::uint64_t seed = 1) {
  birdsim::LinkModel link(birdsim::default_link_params(), seed);
  link.set_variance_scale(0.0);
  return {link, birdsim::GroundLink{}};
}

inline birdsim::ProgramSpec program(std::string id, double compute, double in, double out,
                                    double enc = 0.0, double dec = 0.0) {
  birdsim::ProgramSpec p;
  p.program_id = std::move(id);
  p.task_kind = birdsim::TaskKind::parse("ObjectDetection");
  p.compute_cost = compute;
  p.input_payload = in;
  p.output_payload = out;
  p.encode_cost = enc;
  p.decode_cost = dec;
  return p;
}

// ---- Oracle: pipeline latency under the mean channel ----------------------

struct OracleLink {
  birdsim::BandTable bands;
  double one_way_fraction = 0.5;
  double ground_mbps = 1000.0;
  double ground_delay_ms = 5.0;
};

inline birdsim::LinkBand oracle_band(double altitude, bool rotating) {
  if (rotating) return birdsim::LinkBand::Rotation;
  return altitude < 50.0 ? birdsim::LinkBand::LowAltitude : birdsim::LinkBand::HighAltitude;
}

inline double oracle_hop(const OracleLink& link, int from, int to, double bits,
                         const birdsim::FlightState& flight) {
  if (from == to) return 0.0;
  if (from != 0 && to != 0) {
    return link.ground_delay_ms * 1e-3 + (bits > 0 ? bits / (link.ground_mbps * 1e6) : 0.0);
  }
  const auto& p = link.bands[static_cast<int>(oracle_band(flight.altitude, flight.rotating))];
  const double rate = from == 0 ? p.ul_mean : p.dl_mean;
  return p.rtt_mean * link.one_way_fraction * 1e-3 + (bits > 0 ? bits / (rate * 1e6) : 0.0);
}

struct OracleBreakdown {
  double enc = 0, comm = 0, dec = 0, proc = 0;
  double e2e() const { return enc + comm + dec + proc; }
};

inline OracleBreakdown oracle_e2e(const birdsim::ProgramSpec& p, int src, int exe, int con,
                                  const std::map<int, double>& capacity, const OracleLink& link,
                                  const birdsim::FlightState& flight) {
  OracleBreakdown b;
  b.proc = p.compute_cost / capacity.at(exe);
  if (src == exe && exe == con) return b;
  b.enc = p.encode_cost / capacity.at(src);
  b.dec = p.decode_cost / capacity.at(exe);
  if (exe != src) b.comm += oracle_hop(link, src, exe, p.input_payload, flight);
  if (con != exe) b.comm += oracle_hop(link, exe, con, p.output_payload, flight);
  return b;
}

// ---- Oracle: exhaustive argmin with the documented tie-break -------------

struct OracleChoice {
  int server = -1;
  double e2e = 0.0;
};

/// Servers missing from `capacity` are scored with their advertised latency
/// standing in for decode + process.
inline OracleChoice oracle_select(const birdsim::ProgramSpec& p, const std::vector<int>& servers,
                                  const std::map<int, double>& capacity, const OracleLink& link,
                                  const birdsim::FlightState& flight, int consumer,
                                  const std::map<int, double>& advertised = {}) {
  std::vector<std::tuple<double, double, int>> scored;
  for (int s : servers) {
    OracleBreakdown b;
    if (capacity.count(s) != 0) {
      b = oracle_e2e(p, 0, s, consumer, capacity, link, flight);
    } else {
      b.enc = p.encode_cost / capacity.at(0);
      b.comm = oracle_hop(link, 0, s, p.input_payload, flight);
      if (consumer != s) b.comm += oracle_hop(link, s, consumer, p.output_payload, flight);
      b.proc = advertised.at(s);
    }
    scored.emplace_back(b.e2e(), b.comm, s);
  }
  std::sort(scored.begin(), scored.end());
  return {std::get<2>(scored.front()), std::get<0>(scored.front())};
}

// ---- Random policy instances --------------------------------------------

struct PolicyInstance {
  birdsim::NodeRegistry nodes;
  birdsim::ProgramTables tables;
  std::vector<birdsim::ProgramSpec> programs;
  std::map<int, double> capacity;
  std::map<int, std::map<std::string, double>> advertised;  // server -> program -> latency
  birdsim::FlightState flight;
  int consumer = 0;
  OracleLink link;
  birdsim::Network network;

  /// Candidate server ids for a program, derived straight from the raw data.
  std::vector<int> oracle_candidates(const std::string& program_id) const {
    std::set<int> out;
    if (nodes.at(0).caches(program_id)) out.insert(0);
    for (const auto& e : tables) {
      if (e.server_id != 0 && e.capable && e.program_id == program_id) out.insert(e.server_id);
    }
    return {out.begin(), out.end()};
  }
};

/// Up to `max_servers` servers and `max_programs` programs. Capacities come
/// from a small discrete set so exact ties are common.
inline PolicyInstance random_policy_instance(std::mt19937_64& rng, int max_servers = 5,
                                             int max_programs = 10) {
  using namespace birdsim;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const std::array<double, 5> caps{10, 20, 40, 80, 160};

  PolicyInstance in;
  in.link.bands = default_link_params();
  for (auto& b : in.link.bands) {
    b.ul_mean *= 0.25 + u(rng) * 1.5;
    b.dl_mean *= 0.25 + u(rng) * 1.5;
  }
  const int n_servers = pick(1, max_servers);
  const int n_programs = pick(1, max_programs);
  std::vector<NodeProfile> nodes{default_uav_profile()};
  nodes[0].compute_capacity = caps[pick(0, 2)];
  in.capacity[0] = nodes[0].compute_capacity;
  for (int i = 1; i <= n_servers; ++i) {
    const bool profiled = u(rng) < 0.85;
    if (!profiled) continue;  // known only through its table rows
    NodeProfile n = u(rng) < 0.5 ? default_ecs_profile(i) : default_gcs_profile(i);
    n.compute_capacity = caps[pick(0, 4)];
    in.capacity[i] = n.compute_capacity;
    nodes.push_back(n);
  }
  for (int k = 0; k < n_programs; ++k) {
    const double payload_scale = std::pow(10.0, pick(3, 8));
    ProgramSpec p = program("prog" + std::to_string(k), std::floor(u(rng) * 8) * 5.0,
                            std::floor(u(rng) * 4) * payload_scale, u(rng) * payload_scale,
                            pick(0, 2) * 0.5, pick(0, 2) * 0.5);
    if (u(rng) < 0.4) nodes[0].cached_programs.insert(p.program_id);
    for (int i = 1; i <= n_servers; ++i) {
      if (u(rng) < 0.7) {
        const double adv = std::floor(u(rng) * 4) * 0.25;
        const bool capable = u(rng) < 0.9;
        in.tables.push_back({i, p.program_id, capable, adv});
        if (capable) in.advertised[i][p.program_id] = adv;
      }
    }
    if (u(rng) < 0.3) in.tables.push_back({0, p.program_id, true, 0.0});  // must be ignored
    in.programs.push_back(p);
  }
  in.nodes = NodeRegistry(nodes);
  in.flight = {std::floor(u(rng) * 101.0), u(rng) < 0.25};
  std::vector<int> ids;
  for (const auto& n : in.nodes.all()) ids.push_back(n.node_id);
  in.consumer = ids[pick(0, static_cast<int>(ids.size()) - 1)];
  LinkModel link(in.link.bands, rng());  // noisy on purpose: the policy must use means
  in.network = {link, GroundLink{}};
  return in;
}

// ---- Trace parsing ---------------------------------------------------------

struct TraceRecord {
  double t = 0.0;
  std::uint64_t seq = 0;
  std::string kind;
  std::map<std::string, std::string> fields;

  const std::string& at(const std::string& key) const { return fields.at(key); }
  long long num(const std::string& key) const { return std::stoll(fields.at(key)); }
};

inline TraceRecord parse_trace_line(const std::string& line) {
  TraceRecord r;
  std::istringstream in(line);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "t") r.t = std::stod(value);
    else if (key == "seq") r.seq = std::stoull(value);
    else if (key == "kind") r.kind = value;
    else r.fields[key] = value;
  }
  return r;
}

inline std::vector<TraceRecord> parse_trace(const std::vector<std::string>& lines) {
  std::vector<TraceRecord> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(parse_trace_line(l));
  return out;
}

/// Replays a trace and checks the protocol invariants. Returns an empty
/// string when everything holds, otherwise the first violation.
struct ReplayStats {
  std::uint64_t requests = 0;
  std::uint64_t responses = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t advances = 0;
  std::uint64_t gated_checks = 0;
  std::string violation;
};

inline ReplayStats replay_protocol(const std::vector<TraceRecord>& trace) {
  ReplayStats st;
  using Key = std::tuple<long long, long long, std::string>;
  std::set<Key> outstanding;
  std::optional<long long> current_tick;
  long long t_pos = 0;
  double last_t = 0.0;
  std::optional<double> last_tick_time;
  double t_int = -1.0;
  auto fail = [&](const std::string& why) {
    if (st.violation.empty()) st.violation = why;
  };
  for (const auto& r : trace) {
    if (r.t < last_t) fail("trace time went backwards");
    last_t = r.t;
    if (r.kind == "Tick") {
      const long long tick = r.num("tick");
      if (r.num("t_pos") < t_pos) fail("t_pos decreased at tick");
      t_pos = r.num("t_pos");
      if (last_tick_time) {
        const double gap = r.t - *last_tick_time;
        if (t_int < 0) t_int = gap;
        else if (std::abs(gap - t_int) > 1e-9) fail("tick cadence broken");
      }
      last_tick_time = r.t;
      current_tick = tick;
    } else if (r.kind == "Request") {
      ++st.requests;
      Key k{r.num("tick"), r.num("server"), r.at("program")};
      if (!outstanding.insert(k).second) fail("duplicate outstanding entry");
      if (!current_tick || r.num("tick") != *current_tick) fail("request outside its tick");
    } else if (r.kind == "Response") {
      ++st.responses;
      Key k{r.num("tick"), r.num("server"), r.at("program")};
      if (outstanding.erase(k) != 1) fail("response without request");
    } else if (r.kind == "Timeout") {
      ++st.timeouts;
      Key k{r.num("tick"), r.num("server"), r.at("program")};
      if (outstanding.erase(k) != 1) fail("timeout without request");
    } else if (r.kind == "Advance") {
      ++st.advances;
      ++st.gated_checks;
      const long long from = r.num("from");
      const long long to = r.num("to");
      if (from != t_pos || to <= from) fail("advance does not continue t_pos");
      t_pos = to;
      if (current_tick) {
        for (const auto& k : outstanding) {
          if (std::get<0>(k) == *current_tick) fail("advanced with current-tick entries outstanding");
        }
      }
    }
  }
  if (!outstanding.empty()) fail("entries left unresolved at end of trace");
  return st;
}

// ---- Random scenario generator -------------------------------------------

/// Small randomized mission with optional response loss. Every program has at
/// least one capable server so liveness is achievable.
inline birdsim::Scenario random_scenario(std::mt19937_64& rng, bool with_loss) {
  using namespace birdsim;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  Scenario s;
  s.name = "random";
  s.seed = rng();
  s.t_int = std::array<double, 4>{0.5, 1.0, 2.0, 0.25}[pick(0, 3)];
  s.incident = {0.0, 5.0, 10.0, 150.0};
  s.epoch = 10.0 + std::floor(u(rng) * 10.0);
  s.duration = 200.0;

  const int servers = pick(1, 4);
  const int n_programs = pick(1, 5);
  for (int i = 0; i < n_programs; ++i) {
    ProgramSpec p = program("p" + std::to_string(i), 1.0 + u(rng) * 60.0, u(rng) * 2e7,
                            u(rng) * 5e6, u(rng), u(rng));
    s.programs.emplace(p.program_id, p);
  }

  std::vector<NodeProfile> nodes{default_uav_profile()};
  nodes[0].compute_capacity = 2.0 + u(rng) * 20.0;
  for (int i = 1; i <= servers; ++i) {
    NodeProfile n = i % 2 ? default_ecs_profile(i) : default_gcs_profile(i);
    n.compute_capacity = 5.0 + u(rng) * 200.0;
    n.location = {u(rng) * 500.0, u(rng) * 500.0, 0.0};
    nodes.push_back(n);
  }
  for (const auto& [id, p] : s.programs) {
    bool any = false;
    if (u(rng) < 0.3) {
      nodes[0].cached_programs.insert(id);
      any = true;
    }
    for (int i = 1; i <= servers; ++i) {
      if (u(rng) < 0.6 || (!any && i == servers)) {
        s.tables.push_back({i, id, true, u(rng)});
        any = true;
      }
    }
  }
  s.nodes = NodeRegistry(nodes);
  if (with_loss) {
    for (int i = 1; i <= servers; ++i) s.loss_probability[i] = 0.05 + u(rng) * 0.55;
  }

  const int n_tasks = pick(1, 12);
  for (int i = 0; i < n_tasks; ++i) {
    Task t;
    t.task_id = "task" + std::to_string(i);
    const int k = pick(1, std::min(3, n_programs));
    std::vector<std::string> ids;
    for (const auto& [id, p] : s.programs) ids.push_back(id);
    std::shuffle(ids.begin(), ids.end(), rng);
    t.required_programs.assign(ids.begin(), ids.begin() + k);
    t.issue_time = s.epoch + std::floor(u(rng) * 100.0) * 0.5;
    t.consumer = pick(0, servers);
    s.tasks.push_back(t);
  }

  s.flight_plan = {{0.0, 0.0, false}, {40.0, 30.0, false}, {80.0, 30.0, true},
                   {100.0, 80.0, false}, {200.0, 60.0, false}};
  const auto ids = [&] {
    std::vector<std::string> v;
    for (const auto& [id, p] : s.programs) v.push_back(id);
    return v;
  }();
  s.phases.push_back({"first", {}, {ids.front()}});
  s.phases.push_back({"second", {}, {ids.back()}});
  s.phases.push_back({"last", {}, {}});
  validate_scenario(s);
  return s;
}

/// True when every task program has a placement whose predicted latency
/// (mean channel, worst flight state of the plan) fits in `fraction` of t_int.
/// Liveness can only be expected then, since an entry times out after t_int.
inline bool service_fits_interval(const birdsim::Scenario& s, double fraction) {
  using namespace birdsim;
  const Network net = s.network(s.seed).mean_only();
  for (const auto& task : s.tasks) {
    for (const auto& program_id : task.required_programs) {
      const auto candidates = candidates_for(program_id, s.tables, s.nodes);
      if (candidates.empty()) return false;
      double worst = 0.0;
      for (const auto& wp : s.flight_plan) {
        const FlightState f{wp.altitude, wp.rotating};
        const auto d = select_server(s.programs.at(program_id), candidates, s.nodes, net, f, 0.0,
                                     task.consumer);
        double total = d.predicted.t_e2e;
        // The UAV also needs the response when the consumer is elsewhere.
        if (d.chosen_server != 0 && task.consumer != 0) {
          total += net.hop(d.chosen_server, 0, s.programs.at(program_id).output_payload, 0.0, f)
                       .seconds;
        }
        worst = std::max(worst, total);
      }
      if (worst > fraction * s.t_int) return false;
    }
  }
  return true;
}

}  // namespace testing

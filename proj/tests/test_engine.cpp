#include <doctest.h>

#include <json.hpp>
#include <random>

#include "birdsim/engine.hpp"
#include "birdsim/error.hpp"
#include "birdsim/report.hpp"
#include "birdsim/scenario.hpp"
#include "support.hpp"

using namespace birdsim;
using nlohmann::json;

namespace {

json minimal_doc() {
  return json::parse(R"({
    "name": "mini",
    "seed": 3,
    "t_int": 1.0,
    "epoch": 5.0,
    "duration": 60.0,
    "nodes": [
      {"id": 0, "kind": "UAV5GP", "compute_capacity": 10, "cached_programs": ["detect"]},
      {"id": 2, "kind": "GCS", "compute_capacity": 160}
    ],
    "programs": [
      {"id": "detect", "task_kind": "ObjectDetection", "compute_cost": 20,
       "input_payload": 4e6, "output_payload": 8e3, "encode_cost": 0.5, "decode_cost": 0.5}
    ],
    "tables": [{"server_id": 2, "program_id": "detect"}],
    "tasks": [],
    "flight_plan": [{"t": 0, "altitude": 30}],
    "incident": {"start": 0, "observed": 1, "reported": 2}
  })");
}

ErrorCode load_error(const json& doc) {
  try {
    parse_scenario(doc.dump());
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("scenario unexpectedly valid");
  return ErrorCode::Runtime;
}

std::string load_message(const json& doc) {
  try {
    parse_scenario(doc.dump());
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("event queue orders by time then insertion") {
  EventQueue q;
  q.push(2.0, EventKind::Tick, 0);
  q.push(1.0, EventKind::Timeout, 1);
  q.push(1.0, EventKind::TaskIssued, 2);
  q.push(0.5, EventKind::FlightWaypoint, 3);
  CHECK(q.pop().ref == 3);
  CHECK(q.pop().ref == 1);
  CHECK(q.pop().ref == 2);
  CHECK(q.pop().ref == 0);
  CHECK(q.empty());
}

TEST_CASE("reference scenario loads with its site metadata") {
  const Scenario s = load_scenario(testing::scenario_path("urban-fire.json"));
  CHECK(s.name == "urban-fire");
  CHECK(s.nodes.size() == 3);
  CHECK(s.site.gnb_ground_distance_m == 58.9);
  CHECK(s.site.gnb_height_m == 26.5);
  CHECK(s.nodes.at(0).battery_budget == 1200.0);
  CHECK(s.duration <= 1200.0);
  CHECK(s.seed == 42);
}

TEST_CASE("schema problems are reported with their location") {
  json doc = minimal_doc();
  CHECK_NOTHROW(parse_scenario(doc.dump()));

  doc = minimal_doc();
  doc["flight_plan"][0]["altitude"] = 120;
  CHECK(load_error(doc) == ErrorCode::InvariantViolation);
  CHECK(load_message(doc).find("/flight_plan/0/altitude") != std::string::npos);

  doc = minimal_doc();
  doc["programs"][0].erase("compute_cost");
  CHECK(load_error(doc) == ErrorCode::SchemaError);
  CHECK(load_message(doc).find("/programs/0/compute_cost") != std::string::npos);

  doc = minimal_doc();
  doc["nodes"][1]["compute_capacity"] = "fast";
  CHECK(load_error(doc) == ErrorCode::SchemaError);

  doc = minimal_doc();
  doc["tables"][0]["program_id"] = "ghost";
  CHECK(load_error(doc) == ErrorCode::DanglingReference);

  doc = minimal_doc();
  doc["tasks"] = json::array({{{"id", "t"}, {"programs", {"detect"}}, {"issue_time", 6}, {"consumer", 5}}});
  CHECK(load_error(doc) == ErrorCode::DanglingReference);

  doc = minimal_doc();
  doc["duration"] = 1500;
  CHECK(load_error(doc) == ErrorCode::InvariantViolation);

  doc = minimal_doc();
  doc["nodes"][0]["battery_budget"] = 1500;
  CHECK(load_error(doc) == ErrorCode::InvariantViolation);

  doc = minimal_doc();
  doc["epoch"] = 1.0;
  CHECK(load_error(doc) == ErrorCode::InvariantViolation);

  doc = minimal_doc();
  doc["timeline"] = json::array({{{"id", "x"}, {"implied_tasks", {{{"task_kind", "VRStitching"}}}}}});
  CHECK(load_error(doc) == ErrorCode::DanglingReference);

  doc = minimal_doc();
  doc["link"] = {{"bands", {{"Sideways", {{"ul_mean", 3}}}}}};
  CHECK(load_error(doc) == ErrorCode::SchemaError);

  CHECK_THROWS_AS(parse_scenario("{not json"), Error);
}

TEST_CASE("missing scenario file names the path") {
  try {
    load_scenario("/nonexistent/where.json");
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
    CHECK(std::string(e.what()).find("/nonexistent/where.json") != std::string::npos);
  }
}

TEST_CASE("band overrides replace only the given fields") {
  json doc = minimal_doc();
  doc["link"] = {{"bands", {{"HighAltitude", {{"ul_mean", 20.0}}}}}, {"variance_scale", 0.0}};
  const Scenario s = parse_scenario(doc.dump());
  CHECK(s.link.bands[1].ul_mean == 20.0);
  CHECK(s.link.bands[1].dl_mean == 264.62);
  CHECK(s.link.variance_scale == 0.0);
}

TEST_CASE("flight state interpolation") {
  json doc = minimal_doc();
  doc["flight_plan"] = json::parse(
      R"([{"t": 0, "altitude": 0}, {"t": 60, "altitude": 30},
          {"t": 70, "altitude": 10, "rotating": true}, {"t": 80, "altitude": 10}])");
  const Scenario s = parse_scenario(doc.dump());
  CHECK(flight_state_at(s, 30).altitude == 15.0);
  CHECK_FALSE(flight_state_at(s, 30).rotating);
  const auto rot = flight_state_at(s, 75);
  CHECK(rot.altitude == 10.0);
  CHECK(rot.rotating);
  CHECK(band_for(rot.altitude, rot.rotating) == LinkBand::Rotation);
  CHECK(flight_state_at(s, 500).altitude == 10.0);
  CHECK(flight_state_at(s, -1).altitude == 0.0);
}

TEST_CASE("empty task list yields ticks only") {
  const Scenario s = parse_scenario(minimal_doc().dump());
  const RunResult r = run(s);
  const auto trace = testing::parse_trace(r.trace);
  int ticks = 0;
  for (const auto& rec : trace) {
    CHECK(rec.kind != "Request");
    CHECK(rec.kind != "Local");
    ticks += rec.kind == "Tick";
  }
  CHECK(ticks == 55);
  CHECK(r.metrics.executions.empty());
  CHECK(r.metrics.counters.request_entries == 0);
  CHECK_FALSE(r.metrics.moments.get(Moment::VirtualAwareness).has_value());
  CHECK(r.metrics.moments.get(Moment::Termination) == 60.0);
}

TEST_CASE("local-only task on a quiet link costs exactly its processing") {
  json doc = minimal_doc();
  doc["tables"] = json::array();
  doc["link"] = {{"variance_scale", 0.0}};
  doc["tasks"] = json::parse(R"([{"id": "t", "programs": ["detect"], "issue_time": 7}])");
  const RunResult r = run(parse_scenario(doc.dump()));
  REQUIRE(r.metrics.executions.size() == 1);
  const auto& e = r.metrics.executions[0];
  CHECK(e.local);
  CHECK(e.actual.t_proc == 20.0 / 10.0);
  CHECK(e.actual.t_e2e == 2.0);
  CHECK(e.actual.t_comm == 0.0);
  CHECK(e.completed_at == 9.0);
  REQUIRE(r.metrics.tasks.size() == 1);
  CHECK(r.metrics.tasks[0].completion_time == 9.0);
}

TEST_CASE("remote execution on a quiet link matches the oracle") {
  json doc = minimal_doc();
  doc["nodes"][0]["cached_programs"] = json::array();
  doc["link"] = {{"variance_scale", 0.0}};
  doc["tasks"] = json::parse(R"([{"id": "t", "programs": ["detect"], "issue_time": 7, "consumer": 2}])");
  const RunResult r = run(parse_scenario(doc.dump()));
  REQUIRE(r.metrics.executions.size() == 1);
  const auto& e = r.metrics.executions[0];
  const testing::OracleLink link{default_link_params()};
  const auto o = testing::oracle_e2e(testing::program("detect", 20, 4e6, 8e3, 0.5, 0.5), 0, 2, 2,
                                     {{0, 10}, {2, 160}}, link, {30, false});
  CHECK(e.server_id == 2);
  CHECK(e.actual.t_e2e == doctest::Approx(o.e2e()).epsilon(1e-12));
  CHECK(e.delivered_at == doctest::Approx(7.0 + o.e2e()).epsilon(1e-12));
  CHECK(e.predicted.t_e2e == doctest::Approx(o.e2e()).epsilon(1e-12));
  // GCS consumer: virtual awareness at delivery.
  CHECK(r.metrics.moments.get(Moment::VirtualAwareness) == e.delivered_at);
}

TEST_CASE("unreachable server times out every tick") {
  json doc = minimal_doc();
  doc["nodes"][0]["cached_programs"] = json::array();
  doc["loss"] = json::parse(R"([{"server": 2, "probability": 1.0}])");
  doc["tasks"] = json::parse(R"([{"id": "t", "programs": ["detect"], "issue_time": 5}])");
  const RunResult r = run(parse_scenario(doc.dump()));
  CHECK(r.metrics.counters.responses == 0);
  CHECK(r.metrics.counters.timeouts == r.metrics.counters.request_entries);
  CHECK(r.metrics.counters.request_entries > 20);
  CHECK(r.metrics.tasks_completed() == 0);
}

TEST_CASE("zero loss means no timeouts") {
  const Scenario s = load_scenario(testing::scenario_path("urban-fire.json"));
  const RunResult r = run(s);
  CHECK(r.metrics.counters.timeouts == 0);
  CHECK(r.metrics.lost_responses == 0);
}

TEST_CASE("reference scenario: virtual awareness precedes the truck") {
  const Scenario s = load_scenario(testing::scenario_path("urban-fire.json"));
  const RunResult r = run(s);
  const auto& m = r.metrics.moments;
  REQUIRE(m.get(Moment::VirtualAwareness));
  REQUIRE(m.get(Moment::PhysicalAwareness));
  CHECK(*m.get(Moment::VirtualAwareness) < *m.get(Moment::PhysicalAwareness));
  CHECK(m.ordered());
  CHECK(r.metrics.tasks_completed() == r.metrics.tasks.size());
  bool rule_logged = false;
  for (const auto& line : r.trace) {
    rule_logged = rule_logged || line.find(std::string("rule=") + kVirtualAwarenessRule) !=
                                     std::string::npos;
  }
  CHECK(rule_logged);
}

TEST_CASE("same seed, same trace; other seed, other samples") {
  const Scenario s = load_scenario(testing::scenario_path("urban-fire.json"));
  const RunResult a = run(s, 42);
  const RunResult b = run(s, 42);
  CHECK(a.trace == b.trace);
  CHECK(metrics_csv(a.metrics) == metrics_csv(b.metrics));
  const RunResult c = run(s, 43);
  CHECK(link_samples_csv(a.metrics) != link_samples_csv(c.metrics));
}

TEST_CASE("property: random lossy runs keep the engine invariants") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const Scenario s = testing::random_scenario(rng, trial % 2 == 0);
    const RunResult r = run(s);
    const auto trace = testing::parse_trace(r.trace);
    const auto replay = testing::replay_protocol(trace);
    INFO("trial " << trial);
    CHECK(replay.violation == "");
    const auto& c = r.metrics.counters;
    CHECK(c.request_entries == c.responses + c.timeouts);
    CHECK(replay.requests == c.request_entries);
    CHECK(replay.responses == c.responses);
    CHECK(replay.timeouts == c.timeouts);
    CHECK(r.metrics.moments.ordered());
    for (const auto& rec : trace) CHECK(rec.t <= r.metrics.end_time);
    for (const auto& t : r.metrics.tasks) {
      if (t.completion_time) CHECK(*t.completion_time >= t.issue_time);
    }
  }
}

TEST_CASE("property: tasks complete when service fits in the update interval") {
  std::mt19937_64 rng(31337);
  int qualifying = 0;
  for (int trial = 0; trial < 400 && qualifying < 40; ++trial) {
    const Scenario s = testing::random_scenario(rng, true);
    if (!testing::service_fits_interval(s, 0.5)) continue;
    ++qualifying;
    const RunResult r = run(s);
    INFO("trial " << trial);
    CHECK(r.metrics.tasks_completed() == r.metrics.tasks.size());
  }
  CHECK(qualifying >= 20);
}

TEST_CASE("service slower than the update interval never completes") {
  json doc = minimal_doc();
  doc["nodes"][0]["cached_programs"] = json::array();
  doc["link"] = {{"variance_scale", 0.0}};
  doc["programs"][0]["compute_cost"] = 400;  // 2.5 s on the GCS
  doc["tasks"] = json::parse(R"([{"id": "t", "programs": ["detect"], "issue_time": 5}])");
  const RunResult r = run(parse_scenario(doc.dump()));
  CHECK(r.metrics.tasks_completed() == 0);
  CHECK(r.metrics.counters.responses == 0);
  CHECK(r.metrics.counters.timeouts == r.metrics.counters.request_entries);

  doc["t_int"] = 4.0;
  const RunResult slow = run(parse_scenario(doc.dump()));
  CHECK(slow.metrics.tasks_completed() == 1);
}

TEST_CASE("implied tasks appear on phase entry") {
  const Scenario s = load_scenario(testing::scenario_path("urban-fire.json"));
  const RunResult r = run(s);
  bool found = false;
  for (const auto& t : r.metrics.tasks) {
    if (t.origin == TaskOrigin::TimelineImplied && t.task_id == "surveillance/0-VRStitching") {
      found = true;
    }
  }
  CHECK(found);
  CHECK(r.metrics.final_t_pos == 3);
}

}  // TEST_SUITE

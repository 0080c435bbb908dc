#include "birdsim/sweep.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "birdsim/engine.hpp"
#include "birdsim/error.hpp"
#include "birdsim/report.hpp"

namespace birdsim {

const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::UpdateInterval: return "UpdateInterval";
    case SweepParameter::PayloadScale: return "PayloadScale";
    case SweepParameter::AltitudeProfile: return "AltitudeProfile";
    case SweepParameter::LinkVarianceScale: return "LinkVarianceScale";
  }
  return "?";
}

std::optional<SweepParameter> parse_sweep_parameter(std::string_view text) {
  if (text == "UpdateInterval") return SweepParameter::UpdateInterval;
  if (text == "PayloadScale") return SweepParameter::PayloadScale;
  if (text == "AltitudeProfile") return SweepParameter::AltitudeProfile;
  if (text == "LinkVarianceScale") return SweepParameter::LinkVarianceScale;
  return std::nullopt;
}

SweepSpec parse_sweep_spec(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document.begin(), document.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("/: not valid JSON: ") + e.what());
  }
  SweepSpec spec;
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "/: sweep spec must be an object");
  if (!doc.contains("parameter") || !doc["parameter"].is_string()) {
    throw Error(ErrorCode::SchemaError, "/parameter: missing or not a string");
  }
  auto parameter = parse_sweep_parameter(doc["parameter"].get<std::string>());
  if (!parameter) throw Error(ErrorCode::SchemaError, "/parameter: unknown sweep parameter");
  spec.parameter = *parameter;
  if (!doc.contains("values") || !doc["values"].is_array()) {
    throw Error(ErrorCode::SchemaError, "/values: missing or not an array");
  }
  for (std::size_t i = 0; i < doc["values"].size(); ++i) {
    const auto& v = doc["values"][i];
    if (!v.is_number()) {
      throw Error(ErrorCode::SchemaError, "/values/" + std::to_string(i) + ": expected a number");
    }
    spec.values.push_back(v.get<double>());
  }
  if (doc.contains("replicates")) {
    if (!doc["replicates"].is_number_integer() || doc["replicates"].get<std::int64_t>() < 0) {
      throw Error(ErrorCode::SchemaError, "/replicates: expected a non-negative integer");
    }
    spec.replicates = doc["replicates"].get<std::size_t>();
  }
  if (doc.contains("base_seed")) {
    if (!doc["base_seed"].is_number_integer() || doc["base_seed"].get<std::int64_t>() < 0) {
      throw Error(ErrorCode::SchemaError, "/base_seed: expected a non-negative integer");
    }
    spec.base_seed = doc["base_seed"].get<std::uint64_t>();
  }
  validate_sweep_spec(spec);
  return spec;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open sweep spec '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_sweep_spec(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void validate_sweep_spec(const SweepSpec& spec) {
  if (spec.values.empty()) throw Error(ErrorCode::InvariantViolation, "/values: must not be empty");
  if (spec.replicates < 1) throw Error(ErrorCode::InvariantViolation, "/replicates: must be >= 1");
  for (double v : spec.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvariantViolation, "/values: must be finite");
  }
}

Scenario apply_sweep_value(const Scenario& base, SweepParameter parameter, double value) {
  Scenario s = base;
  switch (parameter) {
    case SweepParameter::UpdateInterval:
      s.t_int = value;
      break;
    case SweepParameter::PayloadScale:
      if (!(value >= 0.0)) throw Error(ErrorCode::InvariantViolation, "payload scale must be >= 0");
      for (auto& [id, p] : s.programs) {
        p.input_payload *= value;
        p.output_payload *= value;
      }
      break;
    case SweepParameter::AltitudeProfile:
      s.flight_plan = {FlightWaypoint{0.0, value, false}};
      break;
    case SweepParameter::LinkVarianceScale:
      s.link.variance_scale = value;
      break;
  }
  validate_scenario(s);
  return s;
}

Stat summarize(const std::vector<double>& values) {
  Stat st;
  st.n = values.size();
  if (values.empty()) return st;
  // Shifted by the first value so identical inputs give an exact mean and 0 spread.
  const double shift = values.front();
  double sum = 0.0;
  for (double v : values) sum += v - shift;
  st.mean = shift + sum / static_cast<double>(st.n);
  if (st.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.std = std::sqrt(ss / static_cast<double>(st.n - 1));
  }
  return st;
}

std::vector<SweepAggregate> aggregate(const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  std::vector<SweepAggregate> out;
  for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
    std::vector<double> e2e, comm, done, timeouts, rv;
    std::size_t n = 0;
    for (const auto& row : rows) {
      if (row.value_index != vi) continue;
      ++n;
      if (row.mean_t_e2e) e2e.push_back(*row.mean_t_e2e);
      if (row.mean_t_comm) comm.push_back(*row.mean_t_comm);
      done.push_back(static_cast<double>(row.tasks_completed));
      timeouts.push_back(static_cast<double>(row.timeouts));
      if (row.reported_to_virtual) rv.push_back(*row.reported_to_virtual);
    }
    out.push_back({spec.values[vi], n, summarize(e2e), summarize(comm), summarize(done),
                   summarize(timeouts), summarize(rv)});
  }
  return out;
}

SweepResult run_sweep(const Scenario& base, const SweepSpec& spec, unsigned threads) {
  validate_sweep_spec(spec);
  std::vector<Scenario> variants;
  variants.reserve(spec.values.size());
  for (double v : spec.values) variants.push_back(apply_sweep_value(base, spec.parameter, v));

  const std::size_t total = spec.values.size() * spec.replicates;
  std::vector<SweepRow> rows(total);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t vi = i / spec.replicates;
      const std::size_t rep = i % spec.replicates;
      try {
        const std::uint64_t seed = spec.replicate_seed(rep);
        const RunResult r = run(variants[vi], seed);
        const auto& m = r.metrics;
        rows[i] = SweepRow{vi, spec.values[vi], rep, seed, m.tasks_completed(), m.executions.size(),
                           m.mean_t_e2e(), m.mean_t_comm(), m.counters.request_entries,
                           m.counters.responses, m.counters.timeouts,
                           m.reported_to_virtual_awareness()};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return {spec, rows, aggregate(spec, rows)};
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::string stat_cols(const Stat& s) {
  if (s.n == 0) return ",";
  return format_number(s.mean) + "," + format_number(s.std);
}

}  // namespace

std::string sweep_rows_csv(const SweepResult& r) {
  std::ostringstream out;
  out << kSweepRowsHeader << "\n";
  for (const auto& row : r.rows) {
    out << to_string(r.spec.parameter) << ',' << format_number(row.value) << ',' << row.replicate
        << ',' << row.seed << ',' << row.tasks_completed << ',' << row.executions << ','
        << opt(row.mean_t_e2e) << ',' << opt(row.mean_t_comm) << ',' << row.requests << ','
        << row.responses << ',' << row.timeouts << ',' << opt(row.reported_to_virtual) << "\n";
  }
  return out.str();
}

std::string sweep_aggregate_csv(const SweepResult& r) {
  std::ostringstream out;
  out << kSweepAggregateHeader << "\n";
  for (const auto& a : r.aggregates) {
    out << to_string(r.spec.parameter) << ',' << format_number(a.value) << ',' << a.replicates
        << ',' << stat_cols(a.t_e2e) << ',' << stat_cols(a.t_comm) << ','
        << stat_cols(a.tasks_completed) << ',' << stat_cols(a.timeouts) << ','
        << stat_cols(a.reported_to_virtual) << "\n";
  }
  return out.str();
}

void write_sweep_artifacts(const SweepResult& r, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + out_dir.string() + "': " + ec.message());
  write_text_file(out_dir / "sweep_runs.csv", sweep_rows_csv(r));
  write_text_file(out_dir / "sweep_aggregate.csv", sweep_aggregate_csv(r));
}

}  // namespace birdsim

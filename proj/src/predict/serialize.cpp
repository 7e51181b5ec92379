#include "ops/predict/batch.hpp"
#include "ops/predict/cluster.hpp"
#include "ops/tasknet/tasknet.hpp"

namespace ops::predict {
namespace {

Json to_json(const Stats& s) { return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}}; }

Stats stats_from_json(const Json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>(), j.at("min").get<double>(), j.at("max").get<double>()};
}

Json stats_map(const std::map<std::string, Stats>& m) {
  Json j = Json::object();
  for (const auto& [k, s] : m) j[k] = to_json(s);
  return j;
}

std::map<std::string, Stats> stats_map_from_json(const Json& j) {
  std::map<std::string, Stats> m;
  for (const auto& [k, v] : j.items()) m[k] = stats_from_json(v);
  return m;
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw DocumentError(std::string("bad ") + what + ": " + e.what());
  }
}

}  // namespace

Json to_json(const Signature& s) {
  Json j = Json::array();
  for (const auto& [goal, o] : s) j.push_back({goal, simcore::to_string(o)});
  return j;
}

Signature signature_from_json(const Json& j) {
  Signature s;
  for (const auto& p : j) s.emplace_back(p.at(0).get<std::string>(), simcore::parse_goal_outcome(p.at(1).get<std::string>()));
  return s;
}

Json to_json(const OutcomeCluster& c) {
  Json env = Json::object();
  for (const auto& [name, bands] : c.envelopes) {
    Json rows = Json::array();
    for (const auto& b : bands) rows.push_back({b.t, b.min, b.p05, b.p50, b.p95, b.max, b.n});
    env[name] = rows;
  }
  Json evrs = Json::object();
  for (const auto& [code, r] : c.evr_counts) evrs[code] = {r.min, r.max};
  return {{"signature", to_json(c.signature)}, {"signature_key", signature_key(c.signature)},
          {"run_ids", c.run_ids},           {"likelihood", c.likelihood},
          {"envelopes", env},               {"kpi_stats", stats_map(c.kpi_stats)},
          {"evr_counts", evrs}};
}

OutcomeCluster outcome_cluster_from_json(const Json& j) {
  return guarded("cluster", [&] {
    OutcomeCluster c;
    c.signature = signature_from_json(j.at("signature"));
    c.run_ids = j.at("run_ids").get<std::vector<std::size_t>>();
    c.likelihood = j.at("likelihood").get<double>();
    for (const auto& [name, rows] : j.at("envelopes").items()) {
      auto& bands = c.envelopes[name];
      for (const auto& r : rows)
        bands.push_back({r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(), r.at(3).get<double>(),
                         r.at(4).get<double>(), r.at(5).get<double>(), r.at(6).get<std::size_t>()});
    }
    c.kpi_stats = stats_map_from_json(j.at("kpi_stats"));
    for (const auto& [code, r] : j.at("evr_counts").items())
      c.evr_counts[code] = {r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()};
    return c;
  });
}

Json to_json(const ClusterSet& s) {
  Json clusters = Json::array();
  for (const auto& c : s.clusters) clusters.push_back(to_json(c));
  return {{"schema", kClustersSchema}, {"batch_id", s.batch_id}, {"net_id", s.net_id},
          {"net_revision", s.net_revision}, {"dt_bin", s.dt_bin}, {"n_runs", s.n_runs},
          {"n_failed", s.n_failed}, {"kpi_stats", stats_map(s.kpi_stats)}, {"clusters", clusters}};
}

ClusterSet cluster_set_from_json(const Json& j) {
  require_schema(j, kClustersSchema);
  return guarded("cluster set", [&] {
    ClusterSet s;
    s.batch_id = j.at("batch_id").get<std::string>();
    s.net_id = j.at("net_id").get<std::string>();
    s.net_revision = j.at("net_revision").get<std::int64_t>();
    s.dt_bin = j.at("dt_bin").get<double>();
    s.n_runs = j.at("n_runs").get<std::size_t>();
    s.n_failed = j.at("n_failed").get<std::size_t>();
    s.kpi_stats = stats_map_from_json(j.at("kpi_stats"));
    for (const auto& c : j.at("clusters")) s.clusters.push_back(outcome_cluster_from_json(c));
    return s;
  });
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Pending: return "Pending";
    case RunStatus::Completed: return "Completed";
    case RunStatus::Failed: return "Failed";
  }
  return "?";
}

RunStatus parse_run_status(std::string_view s) {
  if (s == "Pending") return RunStatus::Pending;
  if (s == "Completed") return RunStatus::Completed;
  if (s == "Failed") return RunStatus::Failed;
  throw DocumentError("unknown run status \"" + std::string(s) + "\"");
}

Json to_json(const BatchManifest& m) {
  Json runs = Json::array();
  for (const auto& r : m.runs) {
    Json jr = {{"index", r.index}, {"seed", r.seed}, {"values", r.values}, {"status", to_string(r.status)}};
    if (!r.trace_hash.empty()) jr["trace_hash"] = r.trace_hash;
    if (!r.error.empty()) jr["error"] = r.error;
    runs.push_back(jr);
  }
  return {{"schema", kManifestSchema}, {"batch_id", m.batch_id}, {"net_id", m.net_id},
          {"net_revision", m.net_revision}, {"spec_hash", m.spec_hash}, {"config_hash", m.config_hash},
          {"sampler", to_string(m.sampler)}, {"n_runs", m.n_runs}, {"master_seed", m.master_seed},
          {"dt_bin", m.dt_bin}, {"n_done", m.n_done()}, {"complete", m.complete()}, {"runs", runs}};
}

BatchManifest manifest_from_json(const Json& j) {
  require_schema(j, kManifestSchema);
  return guarded("batch manifest", [&] {
    BatchManifest m;
    m.batch_id = j.at("batch_id").get<std::string>();
    m.net_id = j.at("net_id").get<std::string>();
    m.net_revision = j.at("net_revision").get<std::int64_t>();
    m.spec_hash = j.at("spec_hash").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.sampler = parse_sampler(j.at("sampler").get<std::string>());
    m.n_runs = j.at("n_runs").get<std::size_t>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.dt_bin = j.at("dt_bin").get<double>();
    for (const auto& jr : j.at("runs")) {
      RunRecord r;
      r.index = jr.at("index").get<std::size_t>();
      r.seed = jr.at("seed").get<std::uint64_t>();
      r.values = jr.at("values").get<std::map<std::string, double>>();
      r.status = parse_run_status(jr.at("status").get<std::string>());
      r.trace_hash = jr.value("trace_hash", "");
      r.error = jr.value("error", "");
      m.runs.push_back(std::move(r));
    }
    return m;
  });
}

Json to_json(const BatchRequest& r) {
  return {{"schema", "batchrequest/1"}, {"net", tasknet::to_json(r.net)},   {"config", simcore::to_json(r.config)},
          {"spec", to_json(r.spec)},    {"n", r.n},                          {"sampler", to_string(r.sampler)},
          {"master_seed", r.master_seed}, {"dt_bin", r.dt_bin}};
}

BatchRequest batch_request_from_json(const Json& j) {
  return guarded("batch request", [&] {
    BatchRequest r;
    r.net = tasknet::network_from_json(j.at("net"));
    r.config = simcore::config_from_json(j.at("config"));
    r.spec = spec_from_json(j.at("spec"));
    r.n = j.at("n").get<std::size_t>();
    r.sampler = parse_sampler(j.value("sampler", "mc"));
    r.master_seed = j.value("master_seed", std::uint64_t{0});
    r.dt_bin = j.value("dt_bin", 10.0);
    return r;
  });
}

}  // namespace ops::predict

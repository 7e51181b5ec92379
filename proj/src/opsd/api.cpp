#include "ops/opsd/api.hpp"

#include <algorithm>

#include "ops/common/hash.hpp"
#include "ops/downlink/incon.hpp"
#include "ops/downlink/match.hpp"
#include "ops/onboard/planner.hpp"
#include "ops/opsd/workflow.hpp"
#include "ops/predict/batch.hpp"
#include "ops/predict/impact.hpp"
#include "ops/simcore/config.hpp"
#include "ops/tasknet/tasknet.hpp"

namespace ops::opsd {

namespace fs = std::filesystem;

const std::vector<ApiErrorCode>& api_error_codes() {
  static const std::vector<ApiErrorCode> codes{
      {"BAD_DOCUMENT", 400},      {"INVALID_ARGUMENT", 400},   {"NOT_FOUND", 404},
      {"DIVERGENT_ANCESTRY", 409}, {"REVISION_MISMATCH", 409}, {"MERGE_CONFLICT", 409},
      {"NOT_READY", 409},          {"VALIDATION_FAILED", 422}, {"MODEL_ERROR", 422},
      {"MODEL_MISMATCH", 422},     {"SINGULAR_SYSTEM", 422},   {"INSTRUMENT_FAULTED", 422},
      {"STORAGE_FULL", 422},       {"BIND_ERROR", 500},        {"INTERNAL", 500},
  };
  return codes;
}

int status_for(const std::string& code) {
  for (const auto& c : api_error_codes())
    if (c.code == code) return c.status;
  return 500;
}

Response error_response(int status, const std::string& code, const std::string& message, Json details) {
  Json e{{"status", status}, {"code", code}, {"message", message}};
  if (!details.is_null()) e["details"] = std::move(details);
  return {status, Json{{"error", e}}};
}

namespace {

class DetailedError : public Error {
 public:
  DetailedError(const std::string& code, const std::string& message, Json details)
      : Error(code, message), details(std::move(details)) {}
  Json details;
};

}  // namespace

Response error_response(const std::exception& e) {
  if (const auto* d = dynamic_cast<const DetailedError*>(&e)) return error_response(status_for(d->code()), d->code(), d->what(), d->details);
  if (const auto* oe = dynamic_cast<const Error*>(&e)) {
    const std::string code = status_for(oe->code()) == 500 ? "INTERNAL" : oe->code();
    return error_response(status_for(code), code, oe->what());
  }
  if (dynamic_cast<const Json::exception*>(&e)) return error_response(400, "BAD_DOCUMENT", e.what());
  return error_response(500, "INTERNAL", e.what());
}

namespace {

Json body_json(const Request& r) {
  Json j = parse_json(r.body, "request body");
  if (!j.is_object()) throw DocumentError("request body must be a JSON object");
  return j;
}

const Json& field(const Json& j, const char* key) {
  if (!j.contains(key)) throw DocumentError(std::string("request needs \"") + key + "\"");
  return j[key];
}

/// Inline document, or the id of a stored one.
Json resolve(Store& store, const std::string& kind, const Json& ref) {
  if (ref.is_string()) return store.get(kind, ref.get<std::string>());
  if (!ref.is_object()) throw DocumentError(kind + " reference must be an object or a stored id");
  store.put(kind, ref);
  return ref;
}

Json violations_json(const std::vector<tasknet::Violation>& vs) {
  Json out = Json::array();
  for (const auto& v : vs) out.push_back(tasknet::to_json(v));
  return out;
}

Json conflicts_json(const std::vector<tasknet::Conflict>& cs) {
  Json out = Json::array();
  for (const auto& c : cs) out.push_back(tasknet::to_json(c));
  return out;
}

tasknet::TaskNetwork valid_net(const Json& doc) {
  auto net = tasknet::network_from_json(doc);
  if (auto vs = tasknet::validate(net); !vs.empty())
    throw DetailedError("VALIDATION_FAILED", "task network \"" + net.id + "\" violates " + std::to_string(vs.size()) + " invariant(s)",
                        Json{{"violations", violations_json(vs)}});
  return net;
}

predict::ClusterSet load_clusters(const Store& store, const std::string& batch_id) {
  const auto dir = store.batch_dir(batch_id);
  if (!fs::exists(dir / "clusters.json")) throw NotFoundError("no completed batch \"" + batch_id + "\"");
  return predict::cluster_set_from_json(read_json_file(dir / "clusters.json"));
}

struct StoredDownlink {
  std::string id;
  downlink::DownlinkTrace trace;
  std::string batch_id;
};

StoredDownlink load_downlink(const Store& store, const std::string& id) {
  const auto dir = store.downlink_dir(id);
  if (!fs::exists(dir / "downlink.json")) throw NotFoundError("no downlink \"" + id + "\"");
  StoredDownlink d{id, downlink::downlink_from_json(read_json_file(dir / "downlink.json")), {}};
  d.batch_id = read_json_file(dir / "meta.json").value("batch_id", std::string());
  return d;
}

struct Matched {
  predict::ClusterSet clusters;
  downlink::MatchReport report;
};

Matched match_stored(const Store& store, const StoredDownlink& d) {
  if (d.batch_id.empty()) throw NotReady("downlink \"" + d.id + "\" was ingested without a batch to match against");
  Matched m{load_clusters(store, d.batch_id), {}};
  const auto request = predict::batch_request_from_json(read_json_file(store.batch_dir(d.batch_id) / "request.json"));
  m.report = downlink::match_cluster(d.trace, m.clusters, request.net);
  return m;
}

}  // namespace

Api::Api(Store& store) : store_(store), worker_([this] { worker_loop(); }) {}

Api::~Api() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

namespace {

std::vector<std::string> segments(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    const auto j = path.find('/', i);
    const auto end = j == std::string::npos ? path.size() : j;
    if (end > i) out.push_back(path.substr(i, end - i));
    i = end + 1;
  }
  return out;
}

std::size_t parse_index(const std::string& s) {
  if (s.empty() || s.size() > 9 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw NotFoundError("no cluster \"" + s + "\"");
  return std::stoul(s);
}

}  // namespace

Response Api::handle(const std::string& method, const std::string& path, const Request& r) {
  try {
    const auto s = segments(path);
    const std::size_t n = s.size();
    const bool get = method == "GET", post = method == "POST";
    if (n == 1 && s[0] == "healthz" && get) return healthz();
    if (n >= 1 && s[0] == "tasknets") {
      if (n == 1 && post) return post_tasknet(r);
      if (n == 1 && get) return list_tasknets();
      if (n == 2 && get) return get_tasknet(s[1]);
      if (n == 3 && s[2] == "merge" && post) return merge_tasknet(s[1], r);
    }
    if (n == 1 && s[0] == "schedule" && post) return schedule(r);
    if (n >= 1 && s[0] == "batches") {
      if (n == 1 && post) return post_batch(r);
      if (n == 2 && get) return get_batch(s[1]);
      if (n == 3 && s[2] == "clusters" && get) return get_clusters(s[1]);
      if (n == 5 && s[2] == "clusters" && s[4] == "envelope" && get) return get_envelope(s[1], parse_index(s[3]), r);
      if (n == 4 && s[2] == "impact" && post) return impact(s[1], s[3]);
    }
    if (n >= 1 && s[0] == "downlink") {
      if (n == 1 && post) return post_downlink(r);
      if (n == 3 && get && s[2] == "match") return get_match(s[1]);
      if (n == 3 && get && s[2] == "evrdiff") return get_evrdiff(s[1]);
      if (n == 3 && get && s[2] == "incon") return get_incon(s[1]);
    }
    if (n == 1 && s[0] == "infer" && post) return post_infer(r);
    return error_response(404, "NOT_FOUND", "no route for " + method + " " + path);
  } catch (const std::exception& e) {
    return error_response(e);
  }
}

Response Api::healthz() const { return {200, Json{{"status", "ok"}}}; }

Response Api::post_tasknet(const Request& r) {
  const Json doc = body_json(r);
  const auto net = valid_net(doc);
  const std::string id = store_.put("tasknets", doc);
  return {200, Json{{"id", id}, {"net_id", net.id}, {"revision", net.revision}, {"content_hash", tasknet::content_hash(net)}}};
}

Response Api::list_tasknets() const {
  Json items = Json::array();
  for (const auto& id : store_.list("tasknets")) {
    const Json doc = store_.get("tasknets", id);
    items.push_back({{"id", id}, {"net_id", doc.value("id", std::string())}, {"revision", doc.value("revision", 0)}});
  }
  return {200, Json{{"tasknets", items}}};
}

Response Api::get_tasknet(const std::string& id) const { return {200, store_.get("tasknets", id)}; }

Response Api::merge_tasknet(const std::string& base_id, const Request& r) {
  const Json j = body_json(r);
  const auto base = tasknet::network_from_json(store_.get("tasknets", base_id));
  const auto ours = tasknet::network_from_json(resolve(store_, "tasknets", field(j, "ours")));
  const auto theirs = tasknet::network_from_json(resolve(store_, "tasknets", field(j, "theirs")));
  const auto result = tasknet::merge(base, ours, theirs);
  if (!result.ok())
    throw DetailedError("MERGE_CONFLICT", std::to_string(result.conflicts.size()) + " merge conflict(s)",
                        Json{{"conflicts", conflicts_json(result.conflicts)}});
  const Json merged = tasknet::to_json(*result.merged);
  Json out{{"tasknet", merged}, {"violations", violations_json(tasknet::validate(*result.merged))}};
  out["id"] = out["violations"].empty() ? Json(store_.put("tasknets", merged)) : Json(nullptr);
  return {200, out};
}

Response Api::schedule(const Request& r) const {
  const Json j = body_json(r);
  const auto net = valid_net(resolve(store_, "tasknets", field(j, "net")));
  const auto cfg = simcore::config_from_json(resolve(store_, "configs", field(j, "config")));
  const auto params = simcore::resolve(cfg, simcore::ScenarioSample{});
  simcore::SpacecraftState state;
  if (j.contains("state")) {
    state = simcore::state_from_json(j["state"]);
  } else {
    state.battery_wh = std::min(cfg.battery_capacity_wh, params.get("battery.initial_wh"));
    state.storage_mbit = cfg.storage_initial_mbit;
    state.temperature_c = cfg.temperature_initial_c;
    for (const auto& i : cfg.instruments) state.instrument_modes[i.id] = simcore::InstrumentMode::On;
  }
  std::set<tasknet::EventKind> events;
  for (const auto& e : j.value("events", Json::array())) events.insert(tasknet::parse_event(e.get<std::string>()));
  const double horizon = j.value("horizon_s", cfg.horizon_s);
  const auto plan = onboard::schedule(net, state, events, horizon, simcore::planner_model(cfg, params));
  return {200, Json{{"timeline", onboard::to_json(plan.timeline)}, {"decision", onboard::to_json(plan.record)}}};
}

Response Api::post_batch(const Request& r) {
  const Json j = body_json(r);
  std::optional<std::string> key;
  if (auto it = r.headers.find("idempotency-key"); it != r.headers.end() && !it->second.empty()) key = it->second;
  if (key) {
    if (auto bound = store_.batch_for_key(*key)) {
      Json p = progress_json(*bound);
      return {store_.batch_complete(*bound) ? 200 : 202, p};
    }
  }

  predict::BatchRequest req;
  req.net = valid_net(resolve(store_, "tasknets", field(j, "net")));
  req.config = simcore::config_from_json(resolve(store_, "configs", field(j, "config")));
  req.spec = predict::spec_from_json(resolve(store_, "specs", field(j, "spec")));
  predict::validate(req.spec);
  const Json n = field(j, "n");
  if (!n.is_number_integer() || n.get<long long>() < 1) throw predict::ArgumentError("n must be a positive integer");
  req.n = n.get<std::size_t>();
  req.sampler = predict::parse_sampler(j.value("sampler", std::string("mc")));
  req.master_seed = j.value("seed", std::uint64_t{0});
  req.dt_bin = j.value("dt_bin", 10.0);
  if (!(req.dt_bin > 0.0)) throw predict::ArgumentError("dt_bin must be positive");
  const long long workers = j.value("workers", 1LL);
  if (workers < 1) throw predict::ArgumentError("workers must be at least 1");

  std::string id = predict::batch_id_of(req);
  if (key) {
    // A concurrent request may have bound the key first.
    if (const auto bound = store_.bind_key(*key, id); bound != id) return {store_.batch_complete(bound) ? 200 : 202, progress_json(bound)};
  }

  {
    std::lock_guard lock(mu_);
    const bool known = progress_.count(id) && progress_[id].state != "failed";
    if (!known && !store_.batch_complete(id)) {
      progress_[id] = {"queued", 0, req.n, {}};
      jobs_.push_back({id, predict::to_json(req), static_cast<std::size_t>(workers)});
      cv_.notify_all();
    }
  }
  return {store_.batch_complete(id) ? 200 : 202, progress_json(id)};
}

Json Api::progress_json(const std::string& id) const {
  if (store_.batch_complete(id)) {
    const auto m = predict::manifest_from_json(read_json_file(store_.batch_dir(id) / "manifest.json"));
    std::size_t failed = 0;
    for (const auto& run : m.runs) failed += run.status == predict::RunStatus::Failed;
    return {{"batch_id", id}, {"state", "complete"}, {"done", m.n_runs}, {"total", m.n_runs}, {"failed", failed},
            {"manifest", predict::to_json(m)}};
  }
  std::lock_guard lock(mu_);
  auto it = progress_.find(id);
  if (it == progress_.end()) throw NotFoundError("no batch \"" + id + "\"");
  Json out{{"batch_id", id}, {"state", it->second.state}, {"done", it->second.done}, {"total", it->second.total}};
  if (!it->second.error.empty()) out["error"] = it->second.error;
  return out;
}

Response Api::get_batch(const std::string& id) const {
  require_hex_id(id);
  return {200, progress_json(id)};
}

Response Api::get_clusters(const std::string& id) const {
  if (!store_.batch_complete(id)) {
    std::lock_guard lock(mu_);
    if (progress_.count(id)) throw NotReady("batch \"" + id + "\" is " + progress_.at(id).state);
  }
  return {200, predict::to_json(load_clusters(store_, id))};
}

Response Api::get_envelope(const std::string& id, std::size_t k, const Request& r) const {
  const auto set = load_clusters(store_, id);
  if (k >= set.clusters.size()) throw NotFoundError("batch \"" + id + "\" has " + std::to_string(set.clusters.size()) + " clusters");
  auto q = r.query.find("channel");
  if (q == r.query.end() || q->second.empty()) throw predict::ArgumentError("query parameter \"channel\" is required");
  const Json cj = predict::to_json(set.clusters[k]);
  if (!cj["envelopes"].contains(q->second)) throw NotFoundError("cluster " + std::to_string(k) + " has no channel \"" + q->second + "\"");
  return {200, Json{{"batch_id", id}, {"cluster", k}, {"channel", q->second}, {"likelihood", set.clusters[k].likelihood},
                    {"bands", cj["envelopes"][q->second]}}};
}

Response Api::impact(const std::string& before, const std::string& after) const {
  const auto a = load_clusters(store_, before);
  const auto b = load_clusters(store_, after);
  return {200, predict::to_json(predict::summarize_impact(a, b))};
}

Response Api::post_downlink(const Request& r) {
  const Json j = body_json(r);
  const Json& tj = field(j, "trace");
  downlink::DownlinkTrace d;
  if (tj.contains("received_fraction")) {
    d = downlink::downlink_from_json(tj);
  } else {
    downlink::DecimationPolicy policy;
    policy.default_period_s = j.value("channel_period_s", 0.0);
    const double budget = j.contains("budget_mbit") ? j["budget_mbit"].get<double>() : downlink::kUnlimitedBudget;
    if (budget < 0.0 || policy.default_period_s < 0.0) throw predict::ArgumentError("budget and channel period must be non-negative");
    d = downlink::decimate(simcore::trace_from_json(tj), budget, policy);
  }
  const std::string batch_id = j.value("batch_id", std::string());
  if (!batch_id.empty()) load_clusters(store_, batch_id);
  const Json doc = downlink::to_json(d);
  const std::string id = sha256_hex(canonical(Json{{"downlink", doc}, {"batch_id", batch_id}}));
  const auto dir = store_.downlink_dir(id);
  store_.write(dir / "meta.json", Json{{"batch_id", batch_id}});
  store_.write(dir / "downlink.json", doc);
  return {200, Json{{"id", id}, {"batch_id", batch_id}, {"received_fraction", d.received_fraction}}};
}

Response Api::get_match(const std::string& id) const {
  const auto d = load_downlink(store_, id);
  const auto m = match_stored(store_, d);
  Json out = downlink::to_json(m.report);
  out["downlink_id"] = id;
  out["batch_id"] = d.batch_id;
  return {200, out};
}

Response Api::get_evrdiff(const std::string& id) const {
  const auto d = load_downlink(store_, id);
  const auto m = match_stored(store_, d);
  Json out = downlink::to_json(downlink::evr_diff(d.trace, m.clusters.clusters.at(m.report.best_cluster)));
  out["downlink_id"] = id;
  out["cluster"] = m.report.best_cluster;
  return {200, out};
}

Response Api::get_incon(const std::string& id) const {
  const auto d = load_downlink(store_, id);
  const auto report = store_.read(store_.downlink_dir(id) / "inference.json");
  if (!report) throw NotReady("no inference for downlink \"" + id + "\"; POST /infer first");
  Json out = downlink::to_json(downlink::build_incon(d.trace, infer::report_from_json(*report)));
  out["downlink_id"] = id;
  return {200, out};
}

Response Api::post_infer(const Request& r) {
  const Json j = body_json(r);
  const auto sem = infer::sem_from_json(resolve(store_, "models", field(j, "model")));
  std::optional<infer::GoalElaborationModel> gem;
  if (j.contains("gem") && !j["gem"].is_null()) gem = infer::gem_from_json(resolve(store_, "models", j["gem"]));
  const Json& did = field(j, "downlink");
  if (!did.is_string()) throw DocumentError("\"downlink\" must be a downlink id");
  const long long beam = j.value("beam", 32LL);
  if (beam < 1) throw predict::ArgumentError("beam must be at least 1");
  const auto d = load_downlink(store_, did.get<std::string>());
  const Json report = infer::to_json(infer_downlink(sem, gem, d.trace, static_cast<std::size_t>(beam)));
  store_.write(store_.downlink_dir(d.id) / "inference.json", report);
  return {200, report};
}

void Api::wait_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [&] { return jobs_.empty() && !busy_; });
}

void Api::worker_loop() {
  for (;;) {
    Job job;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stop_ || !jobs_.empty(); });
      if (stop_) return;
      job = std::move(jobs_.front());
      jobs_.pop_front();
      busy_ = true;
      progress_[job.batch_id].state = "running";
    }
    std::string error;
    try {
      const auto req = predict::batch_request_from_json(job.request);
      const auto dir = store_.batch_dir(job.batch_id);
      auto on_progress = [&](std::size_t done, std::size_t total) {
        std::lock_guard lock(mu_);
        progress_[job.batch_id].done = done;
        progress_[job.batch_id].total = total;
      };
      auto result = predict::run_batch(req, job.workers, predict::directory_sink(dir), on_progress);
      predict::write_batch(dir, req, result);
    } catch (const std::exception& e) {
      error = e.what();
    }
    {
      std::lock_guard lock(mu_);
      auto& p = progress_[job.batch_id];
      p.state = error.empty() ? "complete" : "failed";
      p.error = error;
      busy_ = false;
    }
    idle_cv_.notify_all();
  }
}

}  // namespace ops::opsd

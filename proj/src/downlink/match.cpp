#include <algorithm>
#include <cmath>
#include <set>

#include "ops/downlink/match.hpp"
#include "ops/predict/variability.hpp"
#include "ops/simcore/evr_codes.hpp"
#include "ops/simcore/outcomes.hpp"

namespace ops::downlink {
namespace {

std::string arg(const simcore::Evr& e, const char* key) {
  auto it = e.args.find(key);
  return it == e.args.end() ? std::string() : it->second;
}

}  // namespace

std::string_view to_string(SignatureSource s) { return s == SignatureSource::Products ? "products" : "evrs"; }

predict::Signature reconstruct_signature(const DownlinkTrace& actual, const tasknet::TaskNetwork& net,
                                         SignatureSource* source) {
  if (actual.has_outcome_product()) {
    if (source) *source = SignatureSource::Products;
    return predict::signature_of(actual.trace, net);
  }
  if (source) *source = SignatureSource::Evrs;
  namespace evr = simcore::evr;
  std::map<std::string, simcore::TaskOutcome> tasks;
  std::set<std::string> ended, interrupted, started;
  std::set<tasknet::EventKind> fired;
  for (const auto& e : actual.trace.evrs) {
    if (e.code == evr::kTaskEnd) ended.insert(arg(e, "task"));
    else if (e.code == evr::kTaskInterrupted) interrupted.insert(arg(e, "task"));
    else if (e.code == evr::kTaskStart) started.insert(arg(e, "task"));
    else if (e.code == evr::kPlumeDetected) fired.insert(tasknet::EventKind::PlumeDetected);
    else if (e.code == evr::kStormDetected) fired.insert(tasknet::EventKind::StormDetected);
    else if (e.code == evr::kReconnectionDetected) fired.insert(tasknet::EventKind::ReconnectionDetected);
    else if (e.code == evr::kCameraReset) fired.insert(tasknet::EventKind::CameraReset);
  }
  for (const auto& [id, _] : net.tasks) {
    simcore::TaskOutcome o = simcore::TaskOutcome::Skipped;
    if (ended.count(id)) o = simcore::TaskOutcome::Executed;
    else if (interrupted.count(id)) o = simcore::TaskOutcome::Interrupted;
    else if (started.count(id)) o = simcore::TaskOutcome::Scheduled;
    tasks[id] = o;
  }
  simcore::SimTrace rebuilt;
  rebuilt.goal_outcomes = simcore::goal_outcomes(net, tasks, fired);
  return predict::signature_of(rebuilt, net);
}

int signature_distance(const predict::Signature& a, const predict::Signature& b) {
  std::map<std::string, simcore::GoalOutcome> mb(b.begin(), b.end());
  int d = 0;
  std::set<std::string> seen;
  for (const auto& [goal, outcome] : a) {
    seen.insert(goal);
    auto it = mb.find(goal);
    if (it == mb.end() || it->second != outcome) ++d;
  }
  for (const auto& [goal, _] : b)
    if (!seen.count(goal)) ++d;
  return d;
}

double channel_residual(const DownlinkTrace& actual, const predict::OutcomeCluster& c, double dt_bin,
                        std::map<std::string, double>* per_channel) {
  double total = 0.0;
  for (const auto& [name, samples] : actual.trace.channels) {
    auto env = c.envelopes.find(name);
    if (env == c.envelopes.end() || samples.empty()) continue;
    std::map<long, std::vector<double>> bins;
    for (const auto& s : samples) bins[static_cast<long>(std::floor(s.t / dt_bin + 1e-9))].push_back(s.v);
    std::map<long, const predict::Band*> bands;
    for (const auto& b : env->second) bands[static_cast<long>(std::floor(b.t / dt_bin + 1e-9))] = &b;
    double sum = 0.0;
    for (auto& [k, values] : bins) {
      auto it = bands.find(k);
      if (it == bands.end()) continue;
      std::sort(values.begin(), values.end());
      const predict::Band& band = *it->second;
      const double z = (predict::nearest_rank(values, 0.5) - band.p50) / std::max(band.p95 - band.p05, 1e-9);
      sum += z * z;
    }
    if (per_channel) (*per_channel)[name] = sum;
    total += sum;
  }
  return total;
}

MatchReport match_cluster(const DownlinkTrace& actual, const predict::ClusterSet& clusters,
                          const tasknet::TaskNetwork& net) {
  if (clusters.clusters.empty()) throw predict::ArgumentError("no clusters to match against");
  if (actual.trace.net_revision != clusters.net_revision || actual.trace.net_id != clusters.net_id)
    throw RevisionMismatch("trace is from " + actual.trace.net_id + " r" + std::to_string(actual.trace.net_revision) +
                           ", clusters from " + clusters.net_id + " r" + std::to_string(clusters.net_revision));
  MatchReport r;
  r.signature = reconstruct_signature(actual, net, &r.source);
  const long n = static_cast<long>(clusters.clusters.size());
  r.ranking.resize(n);
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < n; ++k) {
    const auto& c = clusters.clusters[k];
    r.ranking[k] = {static_cast<std::size_t>(k), predict::signature_key(c.signature), c.likelihood,
                    signature_distance(r.signature, c.signature), channel_residual(actual, c, clusters.dt_bin)};
  }
  std::sort(r.ranking.begin(), r.ranking.end(), [](const ClusterRank& a, const ClusterRank& b) {
    if (a.signature_distance != b.signature_distance) return a.signature_distance < b.signature_distance;
    if (a.channel_residual != b.channel_residual) return a.channel_residual < b.channel_residual;
    return a.cluster < b.cluster;
  });
  const ClusterRank& best = r.ranking.front();
  r.best_cluster = best.cluster;
  r.signature_distance = best.signature_distance;
  r.channel_residual = channel_residual(actual, clusters.clusters[best.cluster], clusters.dt_bin, &r.channel_residuals);
  return r;
}

std::vector<std::string> EvrDiff::surplus_codes() const {
  std::vector<std::string> out;
  for (const auto& d : surplus) out.push_back(d.code);
  return out;
}

std::vector<std::string> EvrDiff::missing_codes() const {
  std::vector<std::string> out;
  for (const auto& d : missing) out.push_back(d.code);
  return out;
}

EvrDiff evr_diff(const DownlinkTrace& actual, const predict::OutcomeCluster& cluster) {
  std::map<std::string, std::vector<simcore::Evr>> by_code;
  for (const auto& e : actual.trace.evrs) by_code[e.code].push_back(e);
  EvrDiff d;
  for (const auto& [code, evrs] : by_code) {
    auto it = cluster.evr_counts.find(code);
    const predict::CountRange range = it == cluster.evr_counts.end() ? predict::CountRange{} : it->second;
    if (evrs.size() > range.max) d.surplus.push_back({code, evrs.size(), range, evrs});
  }
  for (const auto& [code, range] : cluster.evr_counts) {
    auto it = by_code.find(code);
    const std::size_t n = it == by_code.end() ? 0 : it->second.size();
    if (n < range.min) d.missing.push_back({code, n, range, {}});
  }
  return d;
}

Json to_json(const MatchReport& r) {
  Json ranking = Json::array();
  for (const auto& c : r.ranking)
    ranking.push_back({{"cluster", c.cluster}, {"signature_key", c.signature_key}, {"likelihood", c.likelihood},
                       {"signature_distance", c.signature_distance}, {"channel_residual", c.channel_residual}});
  return {{"best_cluster", r.best_cluster},
          {"signature_distance", r.signature_distance},
          {"channel_residual", r.channel_residual},
          {"channel_residuals", r.channel_residuals},
          {"signature", predict::to_json(r.signature)},
          {"signature_key", predict::signature_key(r.signature)},
          {"signature_source", to_string(r.source)},
          {"ranking", ranking}};
}

Json to_json(const EvrDiff& d) {
  auto list = [](const std::vector<EvrDelta>& xs) {
    Json a = Json::array();
    for (const auto& x : xs) {
      Json evrs = Json::array();
      for (const auto& e : x.evrs)
        evrs.push_back({{"t", e.t}, {"code", e.code}, {"level", simcore::to_string(e.level)}, {"args", e.args}});
      a.push_back({{"code", x.code}, {"actual", x.actual}, {"expected_min", x.expected.min},
                   {"expected_max", x.expected.max}, {"evrs", evrs}});
    }
    return a;
  };
  return {{"surplus", list(d.surplus)}, {"missing", list(d.missing)}};
}

}  // namespace ops::downlink

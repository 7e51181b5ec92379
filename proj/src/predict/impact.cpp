#include "ops/predict/impact.hpp"

#include <set>

namespace ops::predict {
namespace {

Delta delta(double before, double after) { return {before, after, after - before}; }

std::map<std::string, double> signature_likelihoods(const ClusterSet& s) {
  std::map<std::string, double> out;
  for (const auto& c : s.clusters) out[signature_key(c.signature)] += c.likelihood;
  return out;
}

std::set<std::string> goals_of(const ClusterSet& s) {
  std::set<std::string> out;
  for (const auto& c : s.clusters)
    for (const auto& [g, o] : c.signature) out.insert(g);
  return out;
}

}  // namespace

double executed_likelihood(const ClusterSet& s, const std::string& goal) {
  double p = 0.0;
  for (const auto& c : s.clusters)
    for (const auto& [g, o] : c.signature)
      if (g == goal && o == simcore::GoalOutcome::Executed) p += c.likelihood;
  return p;
}

ImpactReport summarize_impact(const ClusterSet& before, const ClusterSet& after) {
  ImpactReport r;
  r.before_batch = before.batch_id;
  r.after_batch = after.batch_id;

  auto lb = signature_likelihoods(before), la = signature_likelihoods(after);
  std::set<std::string> keys;
  for (const auto& [k, p] : lb) keys.insert(k);
  for (const auto& [k, p] : la) keys.insert(k);
  for (const auto& k : keys) r.signatures.push_back({k, delta(lb[k], la[k])});

  auto goals = goals_of(before);
  goals.merge(goals_of(after));
  for (const auto& g : goals) r.goal_executed[g] = delta(executed_likelihood(before, g), executed_likelihood(after, g));

  std::set<std::string> kpis;
  for (const auto& [k, s] : before.kpi_stats) kpis.insert(k);
  for (const auto& [k, s] : after.kpi_stats) kpis.insert(k);
  auto mean = [](const ClusterSet& s, const std::string& k) {
    auto it = s.kpi_stats.find(k);
    return it == s.kpi_stats.end() ? 0.0 : it->second.mean;
  };
  for (const auto& k : kpis) r.kpi_mean[k] = delta(mean(before, k), mean(after, k));
  return r;
}

Json to_json(const ImpactReport& r) {
  auto dj = [](const Delta& d) { return Json{{"before", d.before}, {"after", d.after}, {"delta", d.delta}}; };
  Json sigs = Json::array();
  for (const auto& s : r.signatures) sigs.push_back({{"signature_key", s.key}, {"likelihood", dj(s.likelihood)}});
  Json goals = Json::object(), kpis = Json::object();
  for (const auto& [g, d] : r.goal_executed) goals[g] = dj(d);
  for (const auto& [k, d] : r.kpi_mean) kpis[k] = dj(d);
  return {{"schema", "impact/1"}, {"before_batch", r.before_batch}, {"after_batch", r.after_batch},
          {"signatures", sigs},   {"goal_executed", goals},         {"kpi_mean", kpis}};
}

}  // namespace ops::predict

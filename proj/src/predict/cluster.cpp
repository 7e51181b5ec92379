#include <algorithm>
#include <cmath>
#include <set>

#include "ops/predict/cluster.hpp"
#include "ops/tasknet/tasknet.hpp"

namespace ops::predict {

Signature signature_of(const simcore::SimTrace& trace, const tasknet::TaskNetwork& net) {
  Signature s;
  for (const auto& id : net.goal_order()) {
    auto it = trace.goal_outcomes.find(id);
    s.emplace_back(id, it == trace.goal_outcomes.end() ? simcore::GoalOutcome::Skipped : it->second);
  }
  return s;
}

std::string signature_key(const Signature& s) {
  std::string key;
  for (const auto& [goal, outcome] : s) {
    if (!key.empty()) key += ';';
    key += goal + '=' + std::string(simcore::to_string(outcome));
  }
  return key;
}

double kpi_count(const tasknet::CounterRef& counter, const simcore::SimTrace& trace) {
  switch (counter.source) {
    case tasknet::CounterSource::Evr:
      return static_cast<double>(std::count_if(trace.evrs.begin(), trace.evrs.end(),
                                               [&](const auto& e) { return e.code == counter.key; }));
    case tasknet::CounterSource::Product:
      return static_cast<double>(std::count_if(trace.products.begin(), trace.products.end(),
                                               [&](const auto& p) { return p.kind == counter.key; }));
    case tasknet::CounterSource::Goal: {
      auto it = trace.goal_outcomes.find(counter.key);
      return it != trace.goal_outcomes.end() && it->second == simcore::GoalOutcome::Executed ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

RunSummary summarize_run(std::size_t index, const simcore::SimTrace& trace, const tasknet::TaskNetwork& net) {
  RunSummary r;
  r.index = index;
  r.trace_hash = trace.trace_hash;
  r.signature = signature_of(trace, net);
  for (const auto* k : net.kpis()) r.kpi_percent[k->id] = tasknet::kpi_progress(*k, kpi_count(k->counter, trace));
  for (const auto& e : trace.evrs) ++r.evr_counts[e.code];
  r.channels = trace.channels;
  return r;
}

Stats stats_of(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  s.min = s.max = xs.front();
  for (double x : xs) {
    sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / n);
  return s;
}

namespace {

std::map<std::string, Stats> kpi_stats(const std::vector<const RunSummary*>& members) {
  std::map<std::string, std::vector<double>> values;
  for (const auto* r : members)
    for (const auto& [id, v] : r->kpi_percent) values[id].push_back(v);
  std::map<std::string, Stats> out;
  for (const auto& [id, xs] : values) out[id] = stats_of(xs);
  return out;
}

OutcomeCluster build_cluster(const std::vector<const RunSummary*>& members, double dt_bin, std::size_t total) {
  OutcomeCluster c;
  c.signature = members.front()->signature;
  for (const auto* r : members) c.run_ids.push_back(r->index);
  c.likelihood = static_cast<double>(members.size()) / static_cast<double>(total);

  std::set<std::string> names, codes;
  for (const auto* r : members) {
    for (const auto& [name, ch] : r->channels) names.insert(name);
    for (const auto& [code, n] : r->evr_counts) codes.insert(code);
  }
  for (const auto& name : names) {
    std::vector<const simcore::Channel*> chans;
    for (const auto* r : members)
      if (auto it = r->channels.find(name); it != r->channels.end()) chans.push_back(&it->second);
    c.envelopes[name] = envelope_parallel(chans, dt_bin);
  }
  for (const auto& code : codes) {
    CountRange range{SIZE_MAX, 0};
    for (const auto* r : members) {
      auto it = r->evr_counts.find(code);
      const std::size_t n = it == r->evr_counts.end() ? 0 : it->second;
      range.min = std::min(range.min, n);
      range.max = std::max(range.max, n);
    }
    c.evr_counts[code] = range;
  }
  c.kpi_stats = kpi_stats(members);
  return c;
}

}  // namespace

ClusterSet cluster(const std::vector<RunSummary>& runs, double dt_bin, std::size_t n_failed) {
  ClusterSet set;
  set.dt_bin = dt_bin;
  set.n_runs = runs.size() + n_failed;
  set.n_failed = n_failed;
  if (runs.empty()) return set;

  std::vector<const RunSummary*> ordered;
  for (const auto& r : runs) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->index < b->index; });
  std::map<std::string, std::vector<const RunSummary*>> groups;
  for (const auto* r : ordered) groups[signature_key(r->signature)].push_back(r);

  for (const auto& [key, members] : groups) set.clusters.push_back(build_cluster(members, dt_bin, runs.size()));
  std::stable_sort(set.clusters.begin(), set.clusters.end(), [](const auto& a, const auto& b) {
    return a.run_ids.size() > b.run_ids.size();
  });
  set.kpi_stats = kpi_stats(ordered);
  return set;
}

}  // namespace ops::predict

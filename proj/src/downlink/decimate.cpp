#include <algorithm>
#include <numeric>

#include "ops/downlink/decimate.hpp"

namespace ops::downlink {

bool DownlinkTrace::has_outcome_product() const {
  return std::any_of(trace.products.begin(), trace.products.end(),
                     [](const auto& p) { return p.kind == kOutcomeProductKind; });
}

DownlinkTrace decimate(const simcore::SimTrace& full, double budget_mbit, const DecimationPolicy& policy) {
  DownlinkTrace d;
  simcore::SimTrace& t = d.trace;
  t.net_id = full.net_id;
  t.net_revision = full.net_revision;
  t.seed = full.seed;
  t.horizon_s = full.horizon_s;
  t.evrs = full.evrs;
  t.decisions = full.decisions;
  d.received_fraction["evrs"] = 1.0;

  for (const auto& [name, samples] : full.channels) {
    auto it = policy.channel_period_s.find(name);
    const double period = it == policy.channel_period_s.end() ? policy.default_period_s : it->second;
    simcore::Channel kept;
    for (const auto& s : samples)
      if (kept.empty() || period <= 0.0 || s.t - kept.back().t >= period - 1e-9) kept.push_back(s);
    d.received_fraction["channel." + name] =
        samples.empty() ? 1.0 : static_cast<double>(kept.size()) / static_cast<double>(samples.size());
    t.channels[name] = std::move(kept);
  }

  std::vector<std::size_t> order(full.products.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto &pa = full.products[a], &pb = full.products[b];
    if (pa.priority != pb.priority) return pa.priority > pb.priority;
    return pa.t_created < pb.t_created;
  });
  double used = 0.0, total = 0.0;
  bool open = true;
  std::vector<char> admitted(full.products.size(), 0);
  for (std::size_t i : order) {
    const double size = full.products[i].size_mbit;
    total += size;
    if (open && used + size <= budget_mbit + 1e-12) {
      used += size;
      admitted[i] = 1;
    } else {
      open = false;
    }
  }
  for (std::size_t i = 0; i < full.products.size(); ++i)
    if (admitted[i]) t.products.push_back(full.products[i]);
  d.received_fraction["products"] = total > 0.0 ? used / total : 1.0;

  if (d.has_outcome_product()) {
    t.task_outcomes = full.task_outcomes;
    t.goal_outcomes = full.goal_outcomes;
  }
  t.trace_hash = simcore::compute_trace_hash(t);
  return d;
}

DownlinkTrace full_downlink(const simcore::SimTrace& full) { return decimate(full, kUnlimitedBudget); }

Json to_json(const DownlinkTrace& d) {
  Json j = simcore::to_json(d.trace);
  j["received_fraction"] = d.received_fraction;
  return j;
}

DownlinkTrace downlink_from_json(const Json& j) {
  DownlinkTrace d;
  d.trace = simcore::trace_from_json(j);
  if (j.contains("received_fraction")) d.received_fraction = j["received_fraction"].get<std::map<std::string, double>>();
  return d;
}

}  // namespace ops::downlink

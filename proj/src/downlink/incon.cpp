#include <algorithm>

#include "ops/downlink/incon.hpp"

namespace ops::downlink {

double last_epoch(const DownlinkTrace& actual) {
  double t = -1.0;
  for (const auto& [_, c] : actual.trace.channels)
    if (!c.empty()) t = std::max(t, c.back().t);
  if (t >= 0.0) return t;
  for (const auto& e : actual.trace.evrs) t = std::max(t, e.t);
  return std::max(t, 0.0);
}

Incon build_incon(const DownlinkTrace& actual, const infer::InferenceReport& report) {
  Incon inc;
  inc.t_epoch = last_epoch(actual);
  auto floored = [](infer::StateEstimate e) {
    e.sigma = std::max(e.sigma.value_or(0.0), 1e-12);
    return e;
  };
  for (const auto& [name, _] : report.series) inc.state[name] = floored(*report.estimate_at(name, inc.t_epoch));
  for (const auto& [name, e] : report.globals) inc.state[name] = floored(e);
  for (const auto& [name, rows] : report.posterior) {
    if (rows.empty()) continue;
    const long k = std::clamp<long>(std::lround(inc.t_epoch / report.bin_s), 0, static_cast<long>(rows.size()) - 1);
    inc.discrete[name] = rows[k];
  }
  for (const auto& [name, p] : report.global_posterior) inc.discrete[name] = p;
  inc.open_anomalies = report.anomalies;
  return inc;
}

Json to_json(const Incon& i) {
  Json state = Json::object(), anomalies = Json::array();
  for (const auto& [name, e] : i.state) state[name] = {{"ml", e.ml}, {"sigma", *e.sigma}};
  for (const auto& a : i.open_anomalies)
    anomalies.push_back({{"t", a.t}, {"subject", a.subject}, {"message", a.message}, {"detached", a.detached}});
  return {{"schema", "incon/1"}, {"t_epoch", i.t_epoch}, {"state", state}, {"discrete", i.discrete},
          {"open_anomalies", anomalies}};
}

}  // namespace ops::downlink

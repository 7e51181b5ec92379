#include <algorithm>
#include <cmath>

#include "ops/infer/report.hpp"

namespace ops::infer {
namespace {

Json estimate_json(const StateEstimate& e) {
  return {{"ml", e.ml}, {"sigma", e.sigma ? Json(*e.sigma) : Json(nullptr)}};
}

StateEstimate estimate_from_json(const Json& j) {
  StateEstimate e;
  e.ml = j.at("ml").get<double>();
  if (j.contains("sigma") && !j["sigma"].is_null()) e.sigma = j["sigma"].get<double>();
  return e;
}

}  // namespace

std::optional<StateEstimate> InferenceReport::estimate_at(const std::string& name, double t) const {
  if (auto it = globals.find(name); it != globals.end()) return it->second;
  auto it = series.find(name);
  if (it == series.end() || it->second.empty()) return std::nullopt;
  const long k = std::clamp<long>(std::lround(t / bin_s), 0, static_cast<long>(it->second.size()) - 1);
  return it->second[k];
}

InferenceReport make_report(const InferenceResult& r, const ExplanationReport& explanations, std::size_t top_n) {
  InferenceReport out;
  const FactorGraph& g = r.graph;
  out.bin_s = g.bin_s;
  for (const auto& v : g.variables) out.n_bins = std::max(out.n_bins, v.bin + 1);
  out.n_bins = std::max(out.n_bins, 1);
  const Hypothesis& top = r.top();
  for (std::size_t i = 0; i < g.variables.size(); ++i) {
    const Variable& v = g.variables[i];
    if (v.kind == VarKind::Continuous) {
      StateEstimate e{top.x[i], std::isfinite(top.sigma[i]) ? std::optional<double>(top.sigma[i]) : std::nullopt};
      if (v.bin < 0) {
        out.globals[v.name] = e;
      } else {
        auto& s = out.series[v.name];
        if (static_cast<int>(s.size()) <= v.bin) s.resize(v.bin + 1);
        s[v.bin] = e;
      }
    } else {
      auto it = r.posterior.find(v.id);
      std::vector<double> p = it == r.posterior.end() ? std::vector<double>(v.domain, 0.0) : it->second;
      if (v.bin < 0) {
        out.global_posterior[v.name] = std::move(p);
      } else {
        auto& s = out.posterior[v.name];
        if (static_cast<int>(s.size()) <= v.bin) s.resize(v.bin + 1);
        s[v.bin] = std::move(p);
      }
    }
  }
  double z = 0.0;
  const double best = top.accumulated_error;
  for (const auto& h : r.hypotheses) z += std::exp(-(h.accumulated_error - best));
  for (std::size_t i = 0; i < r.hypotheses.size() && i < top_n; ++i) {
    const Hypothesis& h = r.hypotheses[i];
    HypothesisSummary s;
    s.rank = static_cast<int>(i) + 1;
    s.accumulated_error = h.accumulated_error;
    s.weight = std::exp(-(h.accumulated_error - best)) / z;
    s.converged = h.converged;
    for (std::size_t f : h.detached(g)) s.detached.push_back(g.factors[f].label);
    out.hypotheses.push_back(std::move(s));
  }
  out.anomalies = explanations.anomalies;
  out.explanations = to_json(explanations)["decisions"];
  return out;
}

Json to_json(const InferenceReport& r) {
  Json series = Json::object(), globals = Json::object(), posterior = Json::object(), gpost = Json::object();
  for (const auto& [name, s] : r.series) {
    Json a = Json::array();
    for (std::size_t k = 0; k < s.size(); ++k) {
      Json e = estimate_json(s[k]);
      e["t"] = static_cast<double>(k) * r.bin_s;
      a.push_back(std::move(e));
    }
    series[name] = std::move(a);
  }
  for (const auto& [name, e] : r.globals) globals[name] = estimate_json(e);
  for (const auto& [name, p] : r.posterior) posterior[name] = p;
  for (const auto& [name, p] : r.global_posterior) gpost[name] = p;
  Json hyps = Json::array(), anomalies = Json::array();
  for (const auto& h : r.hypotheses)
    hyps.push_back({{"rank", h.rank}, {"accumulated_error", h.accumulated_error}, {"weight", h.weight},
                    {"detached", h.detached}, {"converged", h.converged}});
  for (const auto& a : r.anomalies)
    anomalies.push_back({{"t", a.t}, {"subject", a.subject}, {"message", a.message}, {"detached", a.detached}});
  return {{"schema", kReportSchema}, {"bin_s", r.bin_s}, {"n_bins", r.n_bins}, {"series", series},
          {"globals", globals}, {"posterior", posterior}, {"global_posterior", gpost},
          {"hypotheses", hyps}, {"anomalies", anomalies}, {"explanations", r.explanations}};
}

InferenceReport report_from_json(const Json& j) {
  require_schema(j, kReportSchema);
  InferenceReport r;
  r.bin_s = j.at("bin_s").get<double>();
  r.n_bins = j.at("n_bins").get<int>();
  for (const auto& [name, a] : j.at("series").items())
    for (const auto& e : a) r.series[name].push_back(estimate_from_json(e));
  for (const auto& [name, e] : j.at("globals").items()) r.globals[name] = estimate_from_json(e);
  for (const auto& [name, p] : j.at("posterior").items()) r.posterior[name] = p.get<std::vector<std::vector<double>>>();
  for (const auto& [name, p] : j.at("global_posterior").items()) r.global_posterior[name] = p.get<std::vector<double>>();
  for (const auto& h : j.at("hypotheses"))
    r.hypotheses.push_back({h.at("rank").get<int>(), h.at("accumulated_error").get<double>(), h.at("weight").get<double>(),
                            h.at("detached").get<std::vector<std::string>>(), h.value("converged", true)});
  for (const auto& a : j.at("anomalies"))
    r.anomalies.push_back({a.at("t").get<double>(), a.at("subject").get<std::string>(), a.at("message").get<std::string>(),
                           a.at("detached").get<std::vector<std::string>>()});
  r.explanations = j.value("explanations", Json::array());
  return r;
}

}  // namespace ops::infer

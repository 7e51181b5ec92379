#include <algorithm>
#include <cmath>
#include <sstream>

#include "ops/infer/explain.hpp"

namespace ops::infer {
namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

std::vector<std::string> detached_labels(const InferenceResult& r) {
  std::vector<std::string> out;
  for (std::size_t i : r.top().detached(r.graph)) out.push_back(r.graph.factors[i].label);
  return out;
}

ConditionCheck check(const Condition& c, const InferenceResult& r, double t) {
  ConditionCheck out;
  out.condition = c;
  const int vi = r.variable_at(c.variable, t);
  if (vi < 0) throw ModelMismatch("rule variable \"" + c.variable + "\" is not in the inferred graph");
  const Variable& v = r.graph.variables[vi];
  out.var_id = v.id;
  const Hypothesis& top = r.top();
  if (v.kind == VarKind::Discrete) {
    out.discrete = true;
    out.ml = top.modes.discrete[vi];
    auto it = r.posterior.find(v.id);
    if (it != r.posterior.end())
      for (std::size_t value = 0; value < it->second.size(); ++value)
        if (compare(static_cast<double>(value), c.op, c.value)) out.probability += it->second[value];
    out.holds = compare(out.ml, c.op, c.value);
  } else {
    out.ml = top.x[vi];
    if (std::isfinite(top.sigma[vi])) out.sigma = top.sigma[vi];
    out.holds = compare(out.ml, c.op, c.value);
    out.probability = out.holds ? 1.0 : 0.0;
  }
  return out;
}

std::string describe(const ConditionCheck& c) {
  std::string s = c.var_id + " = " + fmt(c.ml);
  if (c.sigma) s += " ± " + fmt(*c.sigma);
  if (c.discrete) s += " (P = " + fmt(c.probability) + ")";
  s += std::string(c.holds ? " satisfies " : " violates ") + std::string(to_string(c.condition.op)) + " " +
       fmt(c.condition.value);
  return s;
}

std::string verdict_list(const std::vector<onboard::Verdict>& vs) {
  std::string s;
  for (auto v : vs) s += (s.empty() ? "" : "/") + std::string(onboard::to_string(v));
  return s.empty() ? "none" : s;
}

}  // namespace

const Hypothesis& InferenceResult::top() const {
  if (hypotheses.empty()) throw ModelError("no feasible hypothesis");
  return hypotheses.front();
}

int InferenceResult::variable_at(const std::string& name, double t) const {
  if (int i = graph.find(name); i >= 0) return i;
  int bins = 0;
  for (const auto& v : graph.variables)
    if (v.name == name) bins = std::max(bins, v.bin + 1);
  if (bins == 0) return -1;
  const long k = std::clamp<long>(std::lround(t / graph.bin_s), 0, bins - 1);
  return graph.find(name + "@" + std::to_string(k));
}

InferenceResult run_inference(const StateEffectModel& m, const Telemetry& telemetry, int n_bins, std::size_t beam,
                              bool parallel) {
  InferenceResult r;
  r.graph = build_graph(m, telemetry, n_bins);
  r.hypotheses = enumerate_hypotheses(r.graph, beam, parallel);
  if (r.hypotheses.empty()) throw ModelError("no feasible hypothesis explains the telemetry");
  r.posterior = discrete_posterior(r.graph, r.hypotheses);
  return r;
}

ExplanationReport explain_decision(const onboard::DecisionRecord& record, const InferenceResult& inference,
                                   const GoalElaborationModel& gem) {
  ExplanationReport out;
  DecisionExplanation d;
  d.t = record.t;
  d.cycle = record.cycle;
  d.trigger = std::string(onboard::to_string(record.trigger.kind));
  if (record.trigger.event) d.trigger += ":" + std::string(tasknet::to_string(*record.trigger.event));

  if (record.trigger.event) {
    const std::string event(tasknet::to_string(*record.trigger.event));
    for (const auto& tr : gem.triggers) {
      if (tr.event != event) continue;
      const int vi = inference.variable_at(tr.variable, record.t);
      if (vi < 0) continue;
      TriggerCheck tc;
      tc.event = event;
      tc.var_id = inference.graph.variables[vi].id;
      tc.value = tr.value;
      tc.top_value = inference.top().modes.discrete[vi];
      if (auto it = inference.posterior.find(tc.var_id); it != inference.posterior.end() && tr.value < static_cast<int>(it->second.size()))
        tc.probability = it->second[tr.value];
      tc.consistent = tc.top_value == tr.value;
      const int bin = inference.graph.variables[vi].bin;
      for (const auto& f : inference.graph.factors) {
        const auto* ma = std::get_if<MultiAssociationFactor>(&f.body);
        if (!ma || f.label.find("(fired)") == std::string::npos) continue;
        const Variable& dv = inference.graph.variables[ma->discrete];
        if (dv.name == tr.variable && dv.bin <= bin && dv.bin >= bin - 1) tc.evidence.push_back(f.label);
      }
      if (!tc.consistent)
        out.anomalies.push_back({record.t, event,
                                 "record reports " + event + " but the top hypothesis has " + tc.var_id + " = " +
                                     std::to_string(tc.top_value) + " (P(" + std::to_string(tr.value) +
                                     ") = " + fmt(tc.probability) + ")",
                                 detached_labels(inference)});
      d.trigger_check = tc;
      break;
    }
  }

  for (const auto& gc : record.considered_goals) {
    const GoalRule* rule = gem.rule_for(gc.goal_id);
    if (!rule) throw ModelMismatch("goal \"" + gc.goal_id + "\" has no goal-elaboration rule");
    VerdictExplanation v;
    v.goal = gc.goal_id;
    v.verdict = gc.verdict;
    v.rule = rule->id;
    v.actions = rule->actions;
    v.rule_holds = true;
    for (const auto& c : rule->conditions) {
      v.checks.push_back(check(c, inference, record.t));
      v.rule_holds = v.rule_holds && v.checks.back().holds;
    }
    const auto& expected = v.rule_holds ? rule->if_true : rule->if_false;
    v.consistent = std::find(expected.begin(), expected.end(), gc.verdict) != expected.end();
    std::string text = "rule " + rule->id + " for " + gc.goal_id + ": ";
    if (v.checks.empty()) text += "unconditional";
    for (std::size_t i = 0; i < v.checks.size(); ++i) text += (i ? "; " : "") + describe(v.checks[i]);
    text += " -> expects " + verdict_list(expected) + ", recorded " + std::string(onboard::to_string(gc.verdict));
    v.text = text;
    if (!v.consistent) out.anomalies.push_back({record.t, gc.goal_id, "verdict disagrees with inferred state: " + text,
                                                detached_labels(inference)});
    d.verdicts.push_back(std::move(v));
  }
  out.decisions.push_back(std::move(d));
  return out;
}

ExplanationReport explain_decisions(const std::vector<onboard::DecisionRecord>& records,
                                    const InferenceResult& inference, const GoalElaborationModel& gem) {
  ExplanationReport out;
  for (const auto& rec : records) {
    ExplanationReport one = explain_decision(rec, inference, gem);
    for (auto& d : one.decisions) out.decisions.push_back(std::move(d));
    for (auto& a : one.anomalies) out.anomalies.push_back(std::move(a));
  }
  return out;
}

Json to_json(const ExplanationReport& r) {
  Json decisions = Json::array(), anomalies = Json::array();
  for (const auto& d : r.decisions) {
    Json verdicts = Json::array();
    for (const auto& v : d.verdicts) {
      Json checks = Json::array();
      for (const auto& c : v.checks) {
        Json cj{{"variable", c.var_id}, {"op", to_string(c.condition.op)}, {"value", c.condition.value},
                {"ml", c.ml}, {"holds", c.holds}};
        cj["sigma"] = c.sigma ? Json(*c.sigma) : Json(nullptr);
        if (c.discrete) cj["probability"] = c.probability;
        checks.push_back(std::move(cj));
      }
      verdicts.push_back({{"goal", v.goal}, {"verdict", onboard::to_string(v.verdict)}, {"rule", v.rule},
                          {"rule_holds", v.rule_holds}, {"checks", checks}, {"actions", v.actions},
                          {"consistent", v.consistent}, {"text", v.text}});
    }
    Json dj{{"t", d.t}, {"cycle", d.cycle}, {"trigger", d.trigger}, {"verdicts", verdicts}};
    if (d.trigger_check) {
      const auto& tc = *d.trigger_check;
      dj["trigger_check"] = {{"event", tc.event}, {"variable", tc.var_id}, {"value", tc.value},
                             {"top_value", tc.top_value}, {"probability", tc.probability}, {"consistent", tc.consistent},
                             {"evidence", tc.evidence}};
    }
    decisions.push_back(std::move(dj));
  }
  for (const auto& a : r.anomalies)
    anomalies.push_back({{"t", a.t}, {"subject", a.subject}, {"message", a.message}, {"detached", a.detached}});
  return {{"decisions", decisions}, {"anomalies", anomalies}};
}

}  // namespace ops::infer

#include <algorithm>
#include <cmath>
#include <set>

#include "ops/common/rng.hpp"
#include "ops/infer/model.hpp"

namespace ops::infer {
namespace {

double num(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw DocumentError(std::string("\"") + key + "\" must be a number");
  return j[key].get<double>();
}

std::string str(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) throw DocumentError(std::string("missing string \"") + key + "\"");
  return j[key].get<std::string>();
}

std::string_view to_string(ModelVarKind k) {
  switch (k) {
    case ModelVarKind::Continuous: return "continuous";
    case ModelVarKind::Discrete: return "discrete";
    case ModelVarKind::Signal: return "signal";
  }
  return "?";
}

ModelVarKind parse_var_kind(std::string_view s) {
  if (s == "continuous") return ModelVarKind::Continuous;
  if (s == "discrete") return ModelVarKind::Discrete;
  if (s == "signal") return ModelVarKind::Signal;
  throw DocumentError("unknown variable kind \"" + std::string(s) + "\"");
}

constexpr std::pair<TemplateKind, const char*> kTemplateNames[] = {
    {TemplateKind::RandomWalk, "random_walk"},     {TemplateKind::MeanReverting, "mean_reverting"},
    {TemplateKind::EnergyBalance, "energy_balance"}, {TemplateKind::Transition, "transition"},
    {TemplateKind::Detection, "detection"},
};

std::string_view to_string(TemplateKind k) {
  for (const auto& [kind, name] : kTemplateNames)
    if (kind == k) return name;
  return "?";
}

TemplateKind parse_template_kind(std::string_view s) {
  for (const auto& [kind, name] : kTemplateNames)
    if (s == name) return kind;
  throw DocumentError("unknown effect template \"" + std::string(s) + "\"");
}

void check_probs(const std::vector<double>& p, std::size_t n, const std::string& what) {
  if (p.size() != n) throw ModelError(what + ": expected " + std::to_string(n) + " probabilities");
  double sum = 0.0;
  for (double q : p) {
    if (!(q >= 0.0 && q <= 1.0)) throw ModelError(what + ": probabilities must lie in [0, 1]");
    sum += q;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ModelError(what + ": probabilities must sum to 1");
}

void validate(const StateEffectModel& m) {
  if (!(m.bin_s > 0.0)) throw ModelError("bin_s must be positive");
  std::set<std::string> names;
  for (const auto& v : m.variables) {
    if (v.name.empty()) throw ModelError("variable without a name");
    if (!names.insert(v.name).second) throw ModelError("duplicate variable \"" + v.name + "\"");
    if (v.kind == ModelVarKind::Continuous && !(v.prior_sigma > 0.0))
      throw ModelError("prior sigma of \"" + v.name + "\" must be positive");
    if (v.kind == ModelVarKind::Discrete) {
      if (v.domain < 2) throw ModelError("discrete variable \"" + v.name + "\" needs a domain of at least 2");
      if (!v.prior_probs.empty()) check_probs(v.prior_probs, v.domain, "prior of \"" + v.name + "\"");
    }
  }
  auto need = [&](const std::string& name, ModelVarKind kind, const std::string& what) -> const ModelVariable& {
    const ModelVariable* v = m.find(name);
    if (!v) throw ModelError(what + " references undeclared variable \"" + name + "\"");
    if (v->kind != kind)
      throw ModelError(what + ": \"" + name + "\" must be " + std::string(to_string(kind)));
    return *v;
  };

  std::set<std::string> driven;
  std::map<std::string, std::vector<std::string>> within;  // same-timestep edges
  for (const auto& e : m.effects) {
    const std::string what = "effect " + e.cause + " -> " + e.effect;
    const auto& t = e.tmpl;
    switch (t.kind) {
      case TemplateKind::RandomWalk:
      case TemplateKind::MeanReverting:
      case TemplateKind::EnergyBalance: {
        const auto& eff = need(e.effect, ModelVarKind::Continuous, what);
        const auto& cause = need(e.cause, ModelVarKind::Continuous, what);
        if (!eff.per_timestep || !cause.per_timestep) throw ModelError(what + ": process effects need per-timestep variables");
        if ((t.kind == TemplateKind::EnergyBalance) == (e.cause == e.effect))
          throw ModelError(what + ": " + std::string(to_string(t.kind)) +
                           (t.kind == TemplateKind::EnergyBalance ? " needs a distinct input" : " must be a self edge"));
        if (!(t.sigma > 0.0)) throw ModelError(what + ": sigma must be positive");
        if (!driven.insert(e.effect).second) throw ModelError(what + ": variable already has a process effect");
        break;
      }
      case TemplateKind::Transition: {
        const auto& v = need(e.effect, ModelVarKind::Discrete, what);
        if (e.cause != e.effect || !v.per_timestep) throw ModelError(what + ": transitions are per-timestep self edges");
        if (t.probs.size() != static_cast<std::size_t>(v.domain)) throw ModelError(what + ": transition rows must match the domain");
        for (const auto& row : t.probs) check_probs(row, v.domain, what);
        if (!driven.insert(e.effect).second) throw ModelError(what + ": variable already has a transition");
        break;
      }
      case TemplateKind::Detection: {
        const auto& cause = need(e.cause, ModelVarKind::Discrete, what);
        need(e.effect, ModelVarKind::Signal, what);
        if (!t.threshold.empty()) {
          need(t.threshold, ModelVarKind::Continuous, what);
          if (t.detect_mu.size() != static_cast<std::size_t>(cause.domain))
            throw ModelError(what + ": need one detector mean per value of \"" + e.cause + "\"");
          if (!(t.detect_s > 0.0)) throw ModelError(what + ": detector spread must be positive");
          within[t.threshold].push_back(e.effect);
        } else {
          if (cause.domain != 2) throw ModelError(what + ": rate detections need a binary cause");
          if (!(t.p_fp >= 0.0 && t.p_fp <= 1.0 && t.p_fn >= 0.0 && t.p_fn <= 1.0))
            throw ModelError(what + ": detector rates must lie in [0, 1]");
        }
        within[e.cause].push_back(e.effect);
        break;
      }
    }
  }

  // Kahn's algorithm over same-timestep edges.
  std::map<std::string, int> indegree;
  for (const auto& [from, tos] : within) {
    indegree.emplace(from, 0);
    for (const auto& to : tos) ++indegree[to];
  }
  std::vector<std::string> ready;
  for (const auto& [n, d] : indegree)
    if (d == 0) ready.push_back(n);
  std::size_t seen = 0;
  while (!ready.empty()) {
    const std::string n = ready.back();
    ready.pop_back();
    ++seen;
    if (auto it = within.find(n); it != within.end())
      for (const auto& to : it->second)
        if (--indegree[to] == 0) ready.push_back(to);
  }
  if (seen != indegree.size()) throw ModelError("effects form a cycle within a timestep");

  std::set<std::string> bound;
  for (const auto& c : m.channels) {
    need(c.variable, ModelVarKind::Continuous, "channel \"" + c.channel + "\"");
    if (!bound.insert(c.channel).second) throw ModelError("channel \"" + c.channel + "\" bound twice");
    if (names.count(c.channel) && m.find(c.channel)->kind == ModelVarKind::Signal)
      throw ModelError("channel \"" + c.channel + "\" is already a detector signal");
    if (!(c.sigma > 0.0)) throw ModelError("channel \"" + c.channel + "\": sigma must be positive");
    if (c.detachable && !(c.detach_penalty > 0.0)) throw ModelError("channel \"" + c.channel + "\": detach penalty must be positive");
  }
  for (const auto& c : m.commands) {
    need(c.variable, ModelVarKind::Continuous, "command");
    if (!(c.sigma > 0.0) || !(c.detach_penalty > 0.0)) throw ModelError("command on \"" + c.variable + "\": sigma and penalty must be positive");
  }
}

}  // namespace

const ModelVariable* StateEffectModel::find(const std::string& name) const {
  for (const auto& v : variables)
    if (v.name == name) return &v;
  return nullptr;
}

std::vector<std::string> StateEffectModel::referenced_channels() const {
  std::set<std::string> out;
  for (const auto& c : channels) out.insert(c.channel);
  for (const auto& v : variables)
    if (v.kind == ModelVarKind::Signal) out.insert(v.name);
  return {out.begin(), out.end()};
}

StateEffectModel sem_from_json(const Json& j) {
  require_schema(j, kSemSchema);
  StateEffectModel m;
  m.bin_s = num(j, "bin_s", m.bin_s);
  for (const auto& vj : j.value("variables", Json::array())) {
    ModelVariable v;
    v.name = str(vj, "name");
    v.kind = parse_var_kind(vj.value("kind", std::string("continuous")));
    v.domain = static_cast<int>(num(vj, "domain", 2));
    v.per_timestep = vj.value("per_timestep", true);
    if (vj.contains("prior")) {
      const Json& p = vj["prior"];
      if (v.kind == ModelVarKind::Discrete) {
        v.prior_probs = p.get<std::vector<double>>();
      } else {
        v.prior_mean = num(p, "mean", 0.0);
        v.prior_sigma = num(p, "sigma", 1.0);
      }
    }
    m.variables.push_back(std::move(v));
  }
  for (const auto& ej : j.value("effects", Json::array())) {
    Effect e;
    e.cause = str(ej, "cause");
    e.effect = str(ej, "effect");
    const Json& tj = ej.at("template");
    auto& t = e.tmpl;
    t.kind = parse_template_kind(str(tj, "type"));
    t.sigma = num(tj, "sigma", 1.0);
    t.theta = num(tj, "theta", 0.0);
    t.mu = num(tj, "mu", 0.0);
    t.supply_w = num(tj, "supply_w", 0.0);
    if (tj.contains("probs")) t.probs = tj["probs"].get<std::vector<std::vector<double>>>();
    t.p_fp = num(tj, "p_fp", 0.0);
    t.p_fn = num(tj, "p_fn", 0.0);
    t.threshold = tj.value("threshold", std::string());
    t.detect_s = num(tj, "s", 1.0);
    if (t.kind == TemplateKind::Detection && !t.threshold.empty()) {
      if (tj.contains("means")) {
        t.detect_mu = tj["means"].get<std::vector<double>>();
      } else {
        // Place the detector means so the nominal threshold reproduces the rates.
        if (!(t.p_fp > 0.0 && t.p_fp < 1.0 && t.p_fn > 0.0 && t.p_fn < 1.0))
          throw ModelError("thresholded detection needs \"means\" or rates strictly inside (0, 1)");
        const double tau = num(tj, "nominal", 1.0);
        t.detect_mu = {tau - t.detect_s * normal_quantile(1.0 - t.p_fp), tau - t.detect_s * normal_quantile(t.p_fn)};
      }
    }
    m.effects.push_back(std::move(e));
  }
  for (const auto& cj : j.value("channels", Json::array())) {
    ChannelBinding c;
    c.channel = str(cj, "channel");
    c.variable = str(cj, "variable");
    c.sigma = num(cj, "sigma", 1.0);
    c.detachable = cj.value("detachable", false);
    c.detach_penalty = num(cj, "detach_penalty", c.detach_penalty);
    m.channels.push_back(std::move(c));
  }
  for (const auto& cj : j.value("commands", Json::array())) {
    Command c;
    c.variable = str(cj, "variable");
    c.value = num(cj, "value", 0.0);
    c.sigma = num(cj, "sigma", c.sigma);
    c.t = num(cj, "t", 0.0);
    c.detach_penalty = num(cj, "detach_penalty", c.detach_penalty);
    m.commands.push_back(std::move(c));
  }
  validate(m);
  return m;
}

Json to_json(const StateEffectModel& m) {
  Json vars = Json::array(), effects = Json::array(), channels = Json::array(), commands = Json::array();
  for (const auto& v : m.variables) {
    Json vj{{"name", v.name}, {"kind", to_string(v.kind)}, {"per_timestep", v.per_timestep}};
    if (v.kind == ModelVarKind::Discrete) {
      vj["domain"] = v.domain;
      if (!v.prior_probs.empty()) vj["prior"] = v.prior_probs;
    } else if (v.prior_mean) {
      vj["prior"] = {{"mean", *v.prior_mean}, {"sigma", v.prior_sigma}};
    }
    vars.push_back(std::move(vj));
  }
  for (const auto& e : m.effects) {
    const auto& t = e.tmpl;
    Json tj{{"type", to_string(t.kind)}};
    switch (t.kind) {
      case TemplateKind::RandomWalk: tj["sigma"] = t.sigma; break;
      case TemplateKind::MeanReverting:
        tj.update({{"sigma", t.sigma}, {"theta", t.theta}, {"mu", t.mu}});
        break;
      case TemplateKind::EnergyBalance: tj.update({{"sigma", t.sigma}, {"supply_w", t.supply_w}}); break;
      case TemplateKind::Transition: tj["probs"] = t.probs; break;
      case TemplateKind::Detection:
        if (t.threshold.empty()) {
          tj.update({{"p_fp", t.p_fp}, {"p_fn", t.p_fn}});
        } else {
          tj.update({{"threshold", t.threshold}, {"means", t.detect_mu}, {"s", t.detect_s}});
        }
        break;
    }
    effects.push_back({{"cause", e.cause}, {"effect", e.effect}, {"template", tj}});
  }
  for (const auto& c : m.channels) {
    Json cj{{"channel", c.channel}, {"variable", c.variable}, {"sigma", c.sigma}, {"detachable", c.detachable}};
    if (c.detachable) cj["detach_penalty"] = c.detach_penalty;
    channels.push_back(std::move(cj));
  }
  for (const auto& c : m.commands)
    commands.push_back({{"variable", c.variable}, {"value", c.value}, {"sigma", c.sigma}, {"t", c.t},
                        {"detach_penalty", c.detach_penalty}});
  return {{"schema", kSemSchema}, {"bin_s", m.bin_s}, {"variables", vars}, {"effects", effects},
          {"channels", channels}, {"commands", commands}};
}

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
  }
  return "?";
}

CompareOp parse_compare_op(std::string_view s) {
  for (CompareOp op : {CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge, CompareOp::Eq, CompareOp::Ne})
    if (to_string(op) == s) return op;
  throw DocumentError("unknown comparison \"" + std::string(s) + "\"");
}

bool compare(double lhs, CompareOp op, double rhs) {
  switch (op) {
    case CompareOp::Lt: return lhs < rhs;
    case CompareOp::Le: return lhs <= rhs;
    case CompareOp::Gt: return lhs > rhs;
    case CompareOp::Ge: return lhs >= rhs;
    case CompareOp::Eq: return lhs == rhs;
    case CompareOp::Ne: return lhs != rhs;
  }
  return false;
}

const GoalRule* GoalElaborationModel::rule_for(const std::string& goal) const {
  for (const auto& r : rules)
    if (r.goal == goal) return &r;
  return nullptr;
}

namespace {

std::vector<onboard::Verdict> verdicts(const Json& j, const char* key) {
  std::vector<onboard::Verdict> out;
  if (!j.contains(key)) return out;
  if (j[key].is_string()) return {onboard::parse_verdict(j[key].get<std::string>())};
  for (const auto& v : j[key]) out.push_back(onboard::parse_verdict(v.get<std::string>()));
  return out;
}

Json verdicts_json(const std::vector<onboard::Verdict>& vs) {
  Json a = Json::array();
  for (auto v : vs) a.push_back(onboard::to_string(v));
  return a;
}

}  // namespace

GoalElaborationModel gem_from_json(const Json& j) {
  require_schema(j, kGemSchema);
  GoalElaborationModel m;
  std::set<std::string> ids, goals;
  for (const auto& rj : j.value("rules", Json::array())) {
    GoalRule r;
    r.id = str(rj, "id");
    r.goal = str(rj, "goal");
    for (const auto& cj : rj.value("conditions", Json::array()))
      r.conditions.push_back({str(cj, "variable"), parse_compare_op(str(cj, "op")), num(cj, "value", 0.0)});
    r.actions = rj.value("actions", std::vector<std::string>{});
    r.if_true = verdicts(rj, "if_true");
    r.if_false = verdicts(rj, "if_false");
    if (r.if_true.empty()) throw DocumentError("rule \"" + r.id + "\" needs if_true verdicts");
    if (!ids.insert(r.id).second) throw DocumentError("duplicate rule id \"" + r.id + "\"");
    if (!goals.insert(r.goal).second) throw DocumentError("goal \"" + r.goal + "\" has more than one rule");
    m.rules.push_back(std::move(r));
  }
  for (const auto& tj : j.value("triggers", Json::array()))
    m.triggers.push_back({str(tj, "event"), str(tj, "variable"), static_cast<int>(num(tj, "value", 1))});
  return m;
}

Json to_json(const GoalElaborationModel& m) {
  Json rules = Json::array(), triggers = Json::array();
  for (const auto& r : m.rules) {
    Json conds = Json::array();
    for (const auto& c : r.conditions) conds.push_back({{"variable", c.variable}, {"op", to_string(c.op)}, {"value", c.value}});
    rules.push_back({{"id", r.id}, {"goal", r.goal}, {"conditions", conds}, {"actions", r.actions},
                     {"if_true", verdicts_json(r.if_true)}, {"if_false", verdicts_json(r.if_false)}});
  }
  for (const auto& t : m.triggers) triggers.push_back({{"event", t.event}, {"variable", t.variable}, {"value", t.value}});
  return {{"schema", kGemSchema}, {"rules", rules}, {"triggers", triggers}};
}

void check_against(const GoalElaborationModel& gem, const StateEffectModel& sem) {
  auto declared = [&](const std::string& name, const std::string& where) {
    const ModelVariable* v = sem.find(name);
    if (!v || v->kind == ModelVarKind::Signal)
      throw ModelError(where + " references undeclared state variable \"" + name + "\"");
  };
  for (const auto& r : gem.rules)
    for (const auto& c : r.conditions) declared(c.variable, "rule \"" + r.id + "\"");
  for (const auto& t : gem.triggers) {
    declared(t.variable, "trigger \"" + t.event + "\"");
    const ModelVariable* v = sem.find(t.variable);
    if (v->kind != ModelVarKind::Discrete || t.value < 0 || t.value >= v->domain)
      throw ModelError("trigger \"" + t.event + "\" needs a value of a discrete variable");
  }
}

Telemetry extract_telemetry(const StateEffectModel& m, const simcore::SimTrace& trace) {
  Telemetry out;
  for (const auto& name : m.referenced_channels()) {
    auto it = trace.channels.find(name);
    out[name] = it == trace.channels.end() ? simcore::Channel{} : it->second;
  }
  // Detection EVRs survive any channel thinning; restore their fired samples.
  for (const auto& e : trace.evrs) {
    auto d = e.args.find("detector");
    if (d == e.args.end()) continue;
    auto it = out.find("detector." + d->second);
    if (it == out.end()) continue;
    auto& ch = it->second;
    auto pos = std::lower_bound(ch.begin(), ch.end(), e.t, [](const simcore::ChannelSample& s, double t) { return s.t < t; });
    if (pos != ch.end() && pos->t == e.t) continue;
    ch.insert(pos, {e.t, 1.0});
  }
  return out;
}

int bins_for(const StateEffectModel& m, double horizon_s) {
  return static_cast<int>(std::floor(horizon_s / m.bin_s + 1e-9)) + 1;
}

}  // namespace ops::infer

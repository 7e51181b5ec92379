#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "ops/infer/model.hpp"

namespace ops::infer {
namespace {

std::string at_time(const std::string& what, double t) {
  std::ostringstream ss;
  ss << what << "@t=" << t;
  return ss.str();
}

std::string var_id(const ModelVariable& v, int bin) {
  return v.per_timestep ? v.name + "@" + std::to_string(bin) : v.name;
}

struct Builder {
  const StateEffectModel& m;
  int n_bins;
  FactorGraph g;

  int bin_of(double t, const std::string& channel) const {
    const long k = std::lround(t / m.bin_s);
    if (!std::isfinite(t) || k < 0 || k >= n_bins)
      throw ModelError(at_time("sample " + channel, t) + " lies outside the horizon");
    return static_cast<int>(k);
  }

  int index(const std::string& name, int bin) const {
    const ModelVariable* v = m.find(name);
    return g.find(var_id(*v, bin));
  }

  ProcessFactor process(const Effect& e, int k) const {
    const double dt = m.bin_s;
    ProcessFactor p;
    p.from = index(e.effect, k);
    p.to = index(e.effect, k + 1);
    p.sigma = e.tmpl.sigma;
    switch (e.tmpl.kind) {
      case TemplateKind::MeanReverting:
        p.a = std::exp(-e.tmpl.theta * dt);
        p.b = e.tmpl.mu * (1.0 - p.a);
        break;
      case TemplateKind::EnergyBalance:
        p.input = index(e.cause, k);
        p.b = e.tmpl.supply_w * dt / 3600.0;
        p.c = -dt / 3600.0;
        break;
      default:
        break;
    }
    return p;
  }
};

}  // namespace

FactorGraph build_graph(const StateEffectModel& m, const Telemetry& telemetry, int n_bins) {
  if (n_bins < 1) throw ModelError("need at least one time bin");
  const std::vector<std::string> referenced = m.referenced_channels();
  for (const auto& [name, _] : telemetry)
    if (std::find(referenced.begin(), referenced.end(), name) == referenced.end())
      throw ModelError("telemetry channel \"" + name + "\" is not referenced by the model");

  Builder b{m, n_bins, {}};
  FactorGraph& g = b.g;
  g.bin_s = m.bin_s;

  for (const auto& v : m.variables) {
    if (v.kind == ModelVarKind::Signal) continue;
    const VarKind kind = v.kind == ModelVarKind::Discrete ? VarKind::Discrete : VarKind::Continuous;
    if (v.per_timestep) {
      for (int k = 0; k < n_bins; ++k) g.add_variable({var_id(v, k), v.name, kind, v.domain, k, 0.0});
    } else {
      g.add_variable({v.name, v.name, kind, v.domain, -1, 0.0});
    }
  }

  for (const auto& v : m.variables) {
    if (v.kind == ModelVarKind::Continuous && v.prior_mean)
      g.add(PriorFactor{g.find(var_id(v, 0)), *v.prior_mean, v.prior_sigma}, 0, "prior " + v.name);
    if (v.kind == ModelVarKind::Discrete && !v.prior_probs.empty())
      g.add(DiscretePriorFactor{g.find(var_id(v, 0)), v.prior_probs}, 0, "prior " + v.name);
  }

  std::map<std::string, const Effect*> process_of;
  for (const auto& e : m.effects) {
    switch (e.tmpl.kind) {
      case TemplateKind::RandomWalk:
      case TemplateKind::MeanReverting:
      case TemplateKind::EnergyBalance:
        process_of[e.effect] = &e;
        for (int k = 0; k + 1 < n_bins; ++k)
          g.add(b.process(e, k), k + 1, "process " + e.effect + "@" + std::to_string(k) + "->" + std::to_string(k + 1));
        break;
      case TemplateKind::Transition:
        for (int k = 0; k + 1 < n_bins; ++k)
          g.add(TransitionFactor{b.index(e.effect, k), b.index(e.effect, k + 1), e.tmpl.probs}, k + 1,
                "transition " + e.effect + "@" + std::to_string(k) + "->" + std::to_string(k + 1));
        break;
      case TemplateKind::Detection: {
        auto it = telemetry.find(e.effect);
        if (it == telemetry.end()) break;
        const ModelVariable& cause = *m.find(e.cause);
        for (const auto& s : it->second) {
          const int k = b.bin_of(s.t, e.effect);
          const bool detected = s.v >= 0.5;
          MultiAssociationFactor f;
          f.discrete = g.find(var_id(cause, k));
          for (int value = 0; value < cause.domain; ++value) {
            ModeTerm term;
            if (e.tmpl.threshold.empty()) {
              const double p = value == 0 ? (detected ? e.tmpl.p_fp : 1.0 - e.tmpl.p_fp)
                                          : (detected ? 1.0 - e.tmpl.p_fn : e.tmpl.p_fn);
              term.penalty = p > 0.0 ? -std::log(p) : std::numeric_limits<double>::infinity();
            } else {
              term.residuals.push_back({b.index(e.tmpl.threshold, k), detected, e.tmpl.detect_mu[value], e.tmpl.detect_s});
            }
            f.modes.push_back(std::move(term));
          }
          g.add(std::move(f), k, at_time("detection " + e.effect, s.t) + (detected ? " (fired)" : " (quiet)"));
        }
        break;
      }
    }
  }

  // Initial values: measured where possible, rolled forward otherwise.
  std::map<int, std::pair<double, int>> measured;  // var -> (sum, count)
  for (const auto& c : m.channels) {
    auto it = telemetry.find(c.channel);
    if (it == telemetry.end()) continue;
    const ModelVariable& v = *m.find(c.variable);
    for (const auto& s : it->second) {
      const int k = b.bin_of(s.t, c.channel);
      const int vi = g.find(var_id(v, k));
      const std::string label = at_time("measurement " + c.channel, s.t);
      if (c.detachable)
        g.add(DetachableFactor{vi, s.v, c.sigma, c.detach_penalty}, k, label);
      else
        g.add(MeasurementFactor{vi, s.v, c.sigma}, k, label);
      auto& [sum, count] = measured[vi];
      sum += s.v;
      ++count;
    }
  }
  std::map<int, double> commanded;
  for (const auto& c : m.commands) {
    const ModelVariable& v = *m.find(c.variable);
    const int k = v.per_timestep ? b.bin_of(c.t, "command " + c.variable) : 0;
    const int vi = g.find(var_id(v, k));
    g.add(DetachableFactor{vi, c.value, c.sigma, c.detach_penalty}, k, at_time("command " + c.variable, c.t));
    commanded[vi] = c.value;
  }

  auto seed = [&](int vi) -> std::optional<double> {
    if (auto it = measured.find(vi); it != measured.end()) return it->second.first / it->second.second;
    if (auto it = commanded.find(vi); it != commanded.end()) return it->second;
    return std::nullopt;
  };
  for (int k = 0; k < n_bins; ++k) {
    for (const auto& v : m.variables) {
      if (v.kind != ModelVarKind::Continuous || (!v.per_timestep && k > 0)) continue;
      const int vi = g.find(var_id(v, k));
      double value = v.prior_mean.value_or(0.0);
      if (auto s = seed(vi)) {
        value = *s;
      } else if (v.per_timestep && k > 0) {
        if (auto it = process_of.find(v.name); it != process_of.end()) {
          const ProcessFactor p = b.process(*it->second, k - 1);
          value = p.a * g.variables[p.from].initial + p.b + (p.input >= 0 ? p.c * g.variables[p.input].initial : 0.0);
        } else {
          value = g.variables[g.find(var_id(v, k - 1))].initial;
        }
      }
      g.variables[vi].initial = value;
    }
  }

  g.check();
  return std::move(b.g);
}

}  // namespace ops::infer

#include "ops/predict/variability.hpp"

#include <cmath>
#include <set>

#include "ops/common/rng.hpp"

namespace ops::predict {

std::string_view to_string(Sampler s) {
  return s == Sampler::MonteCarlo ? "MonteCarlo" : "LatinHypercube";
}

Sampler parse_sampler(std::string_view s) {
  if (s == "mc" || s == "MonteCarlo") return Sampler::MonteCarlo;
  if (s == "lhs" || s == "LatinHypercube") return Sampler::LatinHypercube;
  throw DocumentError("unknown sampler \"" + std::string(s) + "\"");
}

void validate(const VariabilitySpec& spec) {
  std::set<std::string> seen;
  for (const auto& e : spec.entries) {
    if (e.path.empty()) throw DocumentError("variability entry with empty path");
    if (!seen.insert(e.path).second) throw DocumentError("duplicate variability path \"" + e.path + "\"");
    const auto where = " for \"" + e.path + "\"";
    if (const auto* g = std::get_if<Gaussian>(&e.dist)) {
      if (!(g->std > 0.0) || !std::isfinite(g->mean) || !std::isfinite(g->std))
        throw DocumentError("gaussian needs finite mean and std > 0" + where);
    } else if (const auto* u = std::get_if<Uniform>(&e.dist)) {
      if (!(u->lo < u->hi) || !std::isfinite(u->lo) || !std::isfinite(u->hi))
        throw DocumentError("uniform needs finite lo < hi" + where);
    } else {
      const auto& d = std::get<Discrete>(e.dist);
      if (d.probs.empty()) throw DocumentError("discrete distribution is empty" + where);
      double sum = 0.0;
      for (const auto& [v, p] : d.probs) {
        if (!(p >= 0.0) || !std::isfinite(v)) throw DocumentError("discrete probabilities must be >= 0" + where);
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) throw DocumentError("discrete probabilities must sum to 1" + where);
    }
  }
}

double quantile(const Distribution& d, double u) {
  if (const auto* g = std::get_if<Gaussian>(&d)) return g->mean + g->std * normal_quantile(u);
  if (const auto* un = std::get_if<Uniform>(&d)) return un->lo + u * (un->hi - un->lo);
  const auto& probs = std::get<Discrete>(d).probs;
  double cum = 0.0;
  for (const auto& [v, p] : probs) {
    cum += p;
    if (u < cum) return v;
  }
  for (auto it = probs.rbegin(); it != probs.rend(); ++it)
    if (it->second > 0.0) return it->first;
  return probs.rbegin()->first;
}

Json to_json(const Distribution& d) {
  if (const auto* g = std::get_if<Gaussian>(&d)) return {{"kind", "gaussian"}, {"mean", g->mean}, {"std", g->std}};
  if (const auto* u = std::get_if<Uniform>(&d)) return {{"kind", "uniform"}, {"lo", u->lo}, {"hi", u->hi}};
  Json probs = Json::object();
  for (const auto& [v, p] : std::get<Discrete>(d).probs) probs[Json(v).dump()] = p;
  return {{"kind", "discrete"}, {"probs", probs}};
}

Distribution distribution_from_json(const Json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") return Gaussian{j.at("mean").get<double>(), j.at("std").get<double>()};
    if (kind == "uniform") return Uniform{j.at("lo").get<double>(), j.at("hi").get<double>()};
    if (kind == "discrete") {
      Discrete d;
      for (const auto& [k, p] : j.at("probs").items()) {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(k, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != k.size()) throw DocumentError("discrete value \"" + k + "\" is not a number");
        d.probs[v] += p.get<double>();
      }
      return d;
    }
    throw DocumentError("unknown distribution kind \"" + kind + "\"");
  } catch (const nlohmann::json::exception& e) {
    throw DocumentError(std::string("bad distribution: ") + e.what());
  }
}

Json to_json(const VariabilitySpec& s) {
  Json entries = Json::array();
  for (const auto& e : s.entries) entries.push_back({{"path", e.path}, {"dist", to_json(e.dist)}});
  return {{"schema", kSpecSchema}, {"entries", entries}};
}

VariabilitySpec spec_from_json(const Json& j) {
  require_schema(j, kSpecSchema);
  VariabilitySpec s;
  try {
    for (const auto& e : j.at("entries")) s.entries.push_back({e.at("path").get<std::string>(), distribution_from_json(e.at("dist"))});
  } catch (const nlohmann::json::exception& e) {
    throw DocumentError(std::string("bad variability spec: ") + e.what());
  }
  validate(s);
  return s;
}

simcore::SimConfig declare_variables(simcore::SimConfig config, const VariabilitySpec& spec) {
  for (const auto& e : spec.entries) config.variable.insert(e.path);
  return config;
}

}  // namespace ops::predict

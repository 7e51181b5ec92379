#include "ops/simcore/environment.hpp"

#include <cmath>

namespace ops::simcore {

bool plume_exists(const Plume& p, double t) {
  return p.present && t >= p.onset_t && t <= p.onset_t + p.duration_s;
}

bool any_plume(const EnvironmentState& env) {
  for (const auto& p : env.plumes)
    if (p.exists) return true;
  return false;
}

namespace {

void refresh_schedules(EnvironmentState& env) {
  for (auto& p : env.plumes) p.exists = plume_exists(p, env.t);
  env.storm.active =
      env.storm.present && env.t >= env.storm.onset_t && env.t <= env.storm.onset_t + env.storm.duration_s;
}

}  // namespace

EnvironmentState initial_environment(const SimConfig& cfg, const Params& p) {
  EnvironmentState env;
  env.mag.mean_nT = p.get("mag.mean_nT");
  env.mag.reversion_per_s = p.get("mag.reversion_per_s");
  env.mag.volatility_nT = p.get("mag.volatility_nT");
  const double init = p.get("mag.initial_nT");
  env.mag_field_nT = std::isnan(init) ? env.mag.mean_nT : init;
  env.reconnection_rate_per_s = p.get("reconnection.rate_per_s");
  for (const auto& site : cfg.plumes) {
    Plume pl;
    pl.id = site.id;
    pl.lat_deg = site.lat_deg;
    pl.lon_deg = site.lon_deg;
    pl.present = p.get("plume." + site.id + ".present") >= 0.5;
    pl.onset_t = p.get("plume." + site.id + ".onset_s");
    pl.duration_s = p.get("plume." + site.id + ".duration_s");
    env.plumes.push_back(pl);
  }
  env.storm.present = p.get("storm.present") >= 0.5;
  env.storm.onset_t = p.get("storm.onset_s");
  env.storm.duration_s = p.get("storm.duration_s");
  refresh_schedules(env);
  return env;
}

EnvironmentState step_environment(const EnvironmentState& env, double dt, EnvironmentStreams& rng) {
  EnvironmentState next = env;
  next.t = env.t + dt;

  const auto& m = env.mag;
  if (m.reversion_per_s > 0) {
    const double a = std::exp(-m.reversion_per_s * dt);
    const double sd = m.volatility_nT * std::sqrt((1.0 - a * a) / (2.0 * m.reversion_per_s));
    next.mag_field_nT = m.mean_nT + (env.mag_field_nT - m.mean_nT) * a + (sd > 0 ? sd * rng.mag.normal() : 0.0);
  } else if (m.volatility_nT > 0) {
    next.mag_field_nT = env.mag_field_nT + m.volatility_nT * std::sqrt(dt) * rng.mag.normal();
  }

  const std::uint64_t arrivals =
      env.reconnection_rate_per_s > 0 ? rng.reconnection.poisson(env.reconnection_rate_per_s * dt) : 0;
  next.reconnection_event = arrivals > 0;
  next.reconnection_count = env.reconnection_count + arrivals;

  refresh_schedules(next);
  return next;
}

}  // namespace ops::simcore

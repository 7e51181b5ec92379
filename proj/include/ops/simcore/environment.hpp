#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ops/common/rng.hpp"
#include "ops/simcore/config.hpp"

namespace ops::simcore {

struct Plume {
  std::string id;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  bool present = false;  // whether this scenario has the plume at all
  double onset_t = 0.0;
  double duration_s = 0.0;
  bool exists = false;   // present and onset_t <= t <= onset_t + duration_s
};

struct Storm {
  bool present = false;
  double onset_t = 0.0;
  double duration_s = 0.0;
  bool active = false;
};

enum class MagActivity { Quiet, Active };

struct MagProcess {
  double mean_nT = 0.0;
  double reversion_per_s = 0.01;
  double volatility_nT = 0.0;  // diffusion coefficient, nT / sqrt(s)
};

struct EnvironmentState {
  double t = 0.0;
  double mag_field_nT = 0.0;
  MagActivity mag_activity = MagActivity::Quiet;
  MagProcess mag;
  double reconnection_rate_per_s = 0.0;
  bool reconnection_event = false;   // an arrival happened in the last step
  std::uint64_t reconnection_count = 0;
  std::vector<Plume> plumes;
  Storm storm;
};

bool plume_exists(const Plume& p, double t);
bool any_plume(const EnvironmentState& env);

EnvironmentState initial_environment(const SimConfig& cfg, const Params& p);

/// Independent sub-streams for the stochastic environment processes.
struct EnvironmentStreams {
  Rng mag;
  Rng reconnection;
  explicit EnvironmentStreams(std::uint64_t seed) : mag(seed, "env.mag"), reconnection(seed, "env.reconnection") {}
};

/// Advances by dt: exact Ornstein-Uhlenbeck update of the field, Poisson
/// reconnection arrivals, and the plume/storm schedules evaluated at t + dt.
EnvironmentState step_environment(const EnvironmentState& env, double dt, EnvironmentStreams& rng);

}  // namespace ops::simcore

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ops/common/error.hpp"
#include "ops/common/json_io.hpp"
#include "ops/onboard/autonomy.hpp"
#include "ops/onboard/timeline.hpp"
#include "ops/simcore/spacecraft.hpp"

namespace ops::simcore {

OPS_DEFINE_ERROR(ConfigError, "BAD_DOCUMENT");
OPS_DEFINE_ERROR(HorizonError, "INVALID_ARGUMENT");

inline constexpr std::string_view kConfigSchema = "simconfig/1";

struct PlumeSite {
  std::string id;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

struct DetectorConfig {
  onboard::Detector detector;
  double period_s = 30.0;
};

struct FlybySpec {
  double closest_approach_km = 10000.0;  // from Triton's centre
  double v_inf_km_s = 10.0;
  double t_closest_s = 0.0;
  double step_s = 60.0;
};

/// Static description of a simulation. Every tunable number lives in
/// `parameters` (dotted paths) so a ScenarioSample can override it.
struct SimConfig {
  double horizon_s = 3600.0;
  double dt_s = 1.0;
  double channel_period_s = 10.0;

  double battery_capacity_wh = 100.0;
  double battery_floor_wh = 10.0;
  double storage_capacity_mbit = 1000.0;
  double storage_initial_mbit = 0.0;

  std::vector<Instrument> instruments;
  std::vector<PlumeSite> plumes;
  std::vector<DetectorConfig> detectors;

  double mag_window_s = 60.0;
  double mag_threshold_nT2 = 4.0;
  double mag_high_rate_mbit_s = 0.5;
  double mag_low_rate_mbit_s = 0.05;

  InstrumentId reset_instrument = InstrumentId::WAC;
  double reset_recovery_s = 120.0;

  double thermal_tau_s = 3600.0;
  double thermal_env_c = -40.0;
  double thermal_gain_c_per_wh = 0.05;
  double temperature_initial_c = -20.0;

  double search_step_s = 60.0;

  std::map<std::string, double> parameters;
  std::set<std::string> variable;  // paths every sample must provide

  std::optional<std::string> ephemeris_csv;
  std::optional<FlybySpec> flyby;
};

/// One concrete draw parameterizing a run.
struct ScenarioSample {
  std::uint64_t seed = 0;
  std::map<std::string, double> values;
  std::string batch_id;
  std::int64_t index = 0;
  bool operator==(const ScenarioSample&) const = default;
};

/// Parameter table after defaults, config values and the sample are merged.
class Params {
 public:
  double get(const std::string& path) const;
  double get(const std::string& path, double fallback) const;
  const std::map<std::string, double>& all() const { return values_; }

 private:
  friend Params resolve(const SimConfig&, const ScenarioSample&);
  std::map<std::string, double> values_;
};

/// Whether a dotted path names a parameter of this config. Task paths are
/// checked against the network when a run starts.
bool is_known_path(const SimConfig& cfg, const std::string& path);

/// Throws ConfigError on unknown paths or when a declared variable is missing
/// from the sample.
Params resolve(const SimConfig& cfg, const ScenarioSample& sample);

onboard::PlannerModel planner_model(const SimConfig& cfg, const Params& p);

Json to_json(const SimConfig& c);
SimConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
SimConfig load_config(const std::filesystem::path& path);

Json to_json(const ScenarioSample& s);
ScenarioSample sample_from_json(const Json& j);

}  // namespace ops::simcore

#include "ops/simcore/config.hpp"

#include <cmath>

namespace ops::simcore {
namespace {

// Defaults for every fixed (non-templated) parameter path.
const std::map<std::string, double>& fixed_defaults() {
  static const std::map<std::string, double> d{
      {"battery.initial_wh", 100.0},
      {"power.supply_w", 0.0},
      {"power.bus_load_w", 0.0},
      {"mag.mean_nT", 0.0},
      {"mag.reversion_per_s", 0.01},
      {"mag.volatility_nT", 0.0},
      {"mag.initial_nT", NAN},  // NaN: start at the mean
      {"reconnection.rate_per_s", 0.0},
      {"storm.present", 0.0},
      {"storm.onset_s", 0.0},
      {"storm.duration_s", 1e12},
      {"fault.camera_reset.t_s", -1.0},
      {"fault.camera_reset.rate_per_s", 0.0},
      {"camera.noise_scale", 1.0},
  };
  return d;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto dot = s.find('.', start);
    parts.push_back(s.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return parts;
}

void set_defaults(const SimConfig& cfg, std::map<std::string, double>& v) {
  v = fixed_defaults();
  for (const auto& p : cfg.plumes) {
    v["plume." + p.id + ".present"] = 0.0;
    v["plume." + p.id + ".onset_s"] = 0.0;
    v["plume." + p.id + ".duration_s"] = 1e12;
  }
  for (const auto& d : cfg.detectors) {
    const std::string k(onboard::to_string(d.detector.kind));
    v["detector." + k + ".p_fp"] = d.detector.p_fp;
    v["detector." + k + ".p_fn"] = d.detector.p_fn;
  }
}

double number(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(std::string("simconfig: \"") + key + "\" must be a number");
  return j[key].get<double>();
}

}  // namespace

double Params::get(const std::string& path) const {
  auto it = values_.find(path);
  if (it == values_.end()) throw ConfigError("parameter \"" + path + "\" is not defined");
  return it->second;
}

double Params::get(const std::string& path, double fallback) const {
  auto it = values_.find(path);
  return it == values_.end() ? fallback : it->second;
}

bool is_known_path(const SimConfig& cfg, const std::string& path) {
  if (fixed_defaults().count(path)) return true;
  const auto parts = split(path);
  if (parts.size() != 3) return false;
  if (parts[0] == "plume") {
    bool site = false;
    for (const auto& p : cfg.plumes) site = site || p.id == parts[1];
    return site && (parts[2] == "present" || parts[2] == "onset_s" || parts[2] == "duration_s");
  }
  if (parts[0] == "detector") {
    bool have = false;
    for (const auto& d : cfg.detectors) have = have || onboard::to_string(d.detector.kind) == parts[1];
    return have && (parts[2] == "p_fp" || parts[2] == "p_fn");
  }
  if (parts[0] == "task") return parts[2] == "duration_scale" || parts[2] == "power_scale";
  return false;
}

Params resolve(const SimConfig& cfg, const ScenarioSample& sample) {
  Params p;
  set_defaults(cfg, p.values_);
  for (const auto& [k, v] : cfg.parameters) {
    if (!is_known_path(cfg, k)) throw ConfigError("simconfig: unknown parameter \"" + k + "\"");
    p.values_[k] = v;
  }
  for (const auto& [k, v] : sample.values) {
    if (!is_known_path(cfg, k)) throw ConfigError("sample: unknown parameter \"" + k + "\"");
    p.values_[k] = v;
  }
  for (const auto& k : cfg.variable)
    if (!sample.values.count(k)) throw ConfigError("sample is missing variable parameter \"" + k + "\"");
  return p;
}

onboard::PlannerModel planner_model(const SimConfig& cfg, const Params& p) {
  onboard::PlannerModel m;
  m.battery_capacity_wh = cfg.battery_capacity_wh;
  m.battery_floor_wh = cfg.battery_floor_wh;
  m.storage_capacity_mbit = cfg.storage_capacity_mbit;
  m.supply_w = p.get("power.supply_w");
  m.bus_load_w = p.get("power.bus_load_w");
  for (const auto& i : cfg.instruments) m.instruments[i.id] = i;
  m.search_step_s = cfg.search_step_s;
  return m;
}

Json to_json(const SimConfig& c) {
  Json inst = Json::array(), plumes = Json::array(), dets = Json::array();
  for (const auto& i : c.instruments) inst.push_back(to_json(i));
  for (const auto& p : c.plumes) plumes.push_back({{"id", p.id}, {"lat_deg", p.lat_deg}, {"lon_deg", p.lon_deg}});
  for (const auto& d : c.detectors) {
    Json dj = onboard::to_json(d.detector);
    dj["period_s"] = d.period_s;
    dets.push_back(dj);
  }
  Json j{{"schema", kConfigSchema},
         {"horizon_s", c.horizon_s},
         {"dt_s", c.dt_s},
         {"channel_period_s", c.channel_period_s},
         {"spacecraft",
          {{"battery_capacity_wh", c.battery_capacity_wh},
           {"battery_floor_wh", c.battery_floor_wh},
           {"storage_capacity_mbit", c.storage_capacity_mbit},
           {"storage_initial_mbit", c.storage_initial_mbit}}},
         {"instruments", inst},
         {"plumes", plumes},
         {"detectors", dets},
         {"mag",
          {{"window_s", c.mag_window_s},
           {"threshold_nT2", c.mag_threshold_nT2},
           {"high_rate_mbit_s", c.mag_high_rate_mbit_s},
           {"low_rate_mbit_s", c.mag_low_rate_mbit_s}}},
         {"camera_reset", {{"instrument", tasknet::to_string(c.reset_instrument)}, {"recovery_s", c.reset_recovery_s}}},
         {"thermal",
          {{"tau_s", c.thermal_tau_s},
           {"env_c", c.thermal_env_c},
           {"gain_c_per_wh", c.thermal_gain_c_per_wh},
           {"initial_c", c.temperature_initial_c}}},
         {"planner", {{"search_step_s", c.search_step_s}}},
         {"parameters", c.parameters},
         {"variable", c.variable}};
  if (c.ephemeris_csv) j["ephemeris"] = {{"csv", *c.ephemeris_csv}};
  if (c.flyby)
    j["ephemeris"] = {{"flyby",
                       {{"closest_approach_km", c.flyby->closest_approach_km},
                        {"v_inf_km_s", c.flyby->v_inf_km_s},
                        {"t_closest_s", c.flyby->t_closest_s},
                        {"step_s", c.flyby->step_s}}}};
  return j;
}

SimConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  require_schema(j, std::string(kConfigSchema));
  SimConfig c;
  c.horizon_s = number(j, "horizon_s", c.horizon_s);
  c.dt_s = number(j, "dt_s", c.dt_s);
  c.channel_period_s = number(j, "channel_period_s", c.channel_period_s);
  if (!(c.dt_s > 0)) throw ConfigError("simconfig: dt_s must be positive");
  if (!(c.channel_period_s >= c.dt_s)) throw ConfigError("simconfig: channel_period_s must be at least dt_s");

  if (j.contains("spacecraft")) {
    const Json& s = j["spacecraft"];
    c.battery_capacity_wh = number(s, "battery_capacity_wh", c.battery_capacity_wh);
    c.battery_floor_wh = number(s, "battery_floor_wh", c.battery_floor_wh);
    c.storage_capacity_mbit = number(s, "storage_capacity_mbit", c.storage_capacity_mbit);
    c.storage_initial_mbit = number(s, "storage_initial_mbit", c.storage_initial_mbit);
  }
  if (j.contains("instruments"))
    for (const auto& i : j["instruments"]) c.instruments.push_back(instrument_from_json(i));
  if (j.contains("plumes"))
    for (const auto& p : j["plumes"])
      c.plumes.push_back({p.at("id").get<std::string>(), number(p, "lat_deg", 0.0), number(p, "lon_deg", 0.0)});
  if (j.contains("detectors"))
    for (const auto& d : j["detectors"]) c.detectors.push_back({onboard::detector_from_json(d), number(d, "period_s", 30.0)});
  if (j.contains("mag")) {
    const Json& m = j["mag"];
    c.mag_window_s = number(m, "window_s", c.mag_window_s);
    c.mag_threshold_nT2 = number(m, "threshold_nT2", c.mag_threshold_nT2);
    c.mag_high_rate_mbit_s = number(m, "high_rate_mbit_s", c.mag_high_rate_mbit_s);
    c.mag_low_rate_mbit_s = number(m, "low_rate_mbit_s", c.mag_low_rate_mbit_s);
  }
  if (j.contains("camera_reset")) {
    const Json& r = j["camera_reset"];
    if (r.contains("instrument")) c.reset_instrument = tasknet::parse_instrument(r["instrument"].get<std::string>());
    c.reset_recovery_s = number(r, "recovery_s", c.reset_recovery_s);
  }
  if (j.contains("thermal")) {
    const Json& t = j["thermal"];
    c.thermal_tau_s = number(t, "tau_s", c.thermal_tau_s);
    c.thermal_env_c = number(t, "env_c", c.thermal_env_c);
    c.thermal_gain_c_per_wh = number(t, "gain_c_per_wh", c.thermal_gain_c_per_wh);
    c.temperature_initial_c = number(t, "initial_c", c.temperature_initial_c);
  }
  if (j.contains("planner")) c.search_step_s = number(j["planner"], "search_step_s", c.search_step_s);
  if (j.contains("parameters")) {
    for (const auto& [k, v] : j["parameters"].items()) {
      if (!v.is_number()) throw ConfigError("simconfig: parameter \"" + k + "\" must be a number");
      c.parameters[k] = v.get<double>();
    }
  }
  if (j.contains("variable"))
    for (const auto& v : j["variable"]) c.variable.insert(v.get<std::string>());
  if (j.contains("ephemeris")) {
    const Json& e = j["ephemeris"];
    if (e.contains("csv")) {
      std::filesystem::path p = e["csv"].get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      c.ephemeris_csv = p.string();
    } else if (e.contains("flyby")) {
      const Json& f = e["flyby"];
      FlybySpec fs;
      fs.closest_approach_km = number(f, "closest_approach_km", fs.closest_approach_km);
      fs.v_inf_km_s = number(f, "v_inf_km_s", fs.v_inf_km_s);
      fs.t_closest_s = number(f, "t_closest_s", fs.t_closest_s);
      fs.step_s = number(f, "step_s", fs.step_s);
      c.flyby = fs;
    }
  }
  for (const auto& [k, v] : c.parameters)
    if (!is_known_path(c, k)) throw ConfigError("simconfig: unknown parameter \"" + k + "\"");
  for (const auto& k : c.variable)
    if (!is_known_path(c, k)) throw ConfigError("simconfig: unknown variable parameter \"" + k + "\"");
  return c;
}

SimConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path), path.parent_path());
}

Json to_json(const ScenarioSample& s) {
  return Json{{"seed", s.seed}, {"values", s.values}, {"batch_id", s.batch_id}, {"index", s.index}};
}

ScenarioSample sample_from_json(const Json& j) {
  ScenarioSample s;
  s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("values"))
    for (const auto& [k, v] : j["values"].items()) s.values[k] = v.get<double>();
  s.batch_id = j.value("batch_id", "");
  s.index = j.value("index", std::int64_t{0});
  return s;
}

}  // namespace ops::simcore

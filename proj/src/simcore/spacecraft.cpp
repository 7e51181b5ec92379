#include "ops/simcore/spacecraft.hpp"

#include "ops/common/error.hpp"

namespace ops::simcore {

std::string_view to_string(EvrLevel l) {
  switch (l) {
    case EvrLevel::INFO: return "INFO";
    case EvrLevel::WARN: return "WARN";
    case EvrLevel::ERROR: return "ERROR";
  }
  return "?";
}

EvrLevel parse_evr_level(std::string_view s) {
  if (s == "INFO") return EvrLevel::INFO;
  if (s == "WARN") return EvrLevel::WARN;
  if (s == "ERROR") return EvrLevel::ERROR;
  throw DocumentError("unknown EVR level \"" + std::string(s) + "\"");
}

std::string_view to_string(InstrumentMode m) {
  switch (m) {
    case InstrumentMode::Off: return "Off";
    case InstrumentMode::On: return "On";
    case InstrumentMode::Resetting: return "Resetting";
  }
  return "?";
}

std::string_view to_string(FaultFlag f) {
  switch (f) {
    case FaultFlag::CameraFault: return "CameraFault";
    case FaultFlag::PowerOverdraw: return "PowerOverdraw";
  }
  return "?";
}

Json to_json(const Evr& e) {
  return Json{{"t", e.t}, {"level", to_string(e.level)}, {"code", e.code}, {"args", e.args}};
}

Evr evr_from_json(const Json& j) {
  Evr e;
  e.t = j.at("t").get<double>();
  e.level = parse_evr_level(j.at("level").get<std::string>());
  e.code = j.at("code").get<std::string>();
  if (j.contains("args")) e.args = j["args"].get<std::map<std::string, std::string>>();
  return e;
}

Json to_json(const DataProduct& p) {
  return Json{{"id", p.id},
              {"kind", p.kind},
              {"size_mbit", p.size_mbit},
              {"t_created", p.t_created},
              {"source_task", p.source_task},
              {"priority", p.priority}};
}

DataProduct product_from_json(const Json& j) {
  DataProduct p;
  p.id = j.at("id").get<std::string>();
  p.kind = j.at("kind").get<std::string>();
  p.size_mbit = j.at("size_mbit").get<double>();
  p.t_created = j.at("t_created").get<double>();
  p.source_task = j.value("source_task", "");
  p.priority = j.value("priority", std::int64_t{0});
  return p;
}

Json to_json(const Instrument& i) {
  return Json{{"id", tasknet::to_string(i.id)},
              {"power_w", i.power_w},
              {"data_per_obs_mbit", i.data_per_obs_mbit},
              {"fov_deg", i.fov_deg},
              {"noise_floor", i.noise_floor}};
}

Instrument instrument_from_json(const Json& j) {
  Instrument i;
  i.id = tasknet::parse_instrument(j.at("id").get<std::string>());
  i.power_w = j.value("power_w", 0.0);
  i.data_per_obs_mbit = j.value("data_per_obs_mbit", 0.0);
  i.fov_deg = j.value("fov_deg", 1.0);
  i.noise_floor = j.value("noise_floor", 1.0);
  return i;
}

Json to_json(const SpacecraftState& s) {
  Json modes = Json::object();
  for (const auto& [id, m] : s.instrument_modes) modes[std::string(tasknet::to_string(id))] = to_string(m);
  Json faults = Json::array();
  for (auto f : s.faults) faults.push_back(to_string(f));
  Json until = Json::object();
  for (const auto& [id, t] : s.unavailable_until) until[std::string(tasknet::to_string(id))] = t;
  return Json{{"t", s.t},
              {"battery_wh", s.battery_wh},
              {"storage_mbit", s.storage_mbit},
              {"temperature_c", s.temperature_c},
              {"boresight", s.boresight},
              {"instrument_modes", modes},
              {"faults", faults},
              {"unavailable_until", until}};
}

SpacecraftState state_from_json(const Json& j) {
  SpacecraftState s;
  s.t = j.value("t", 0.0);
  s.battery_wh = j.value("battery_wh", 0.0);
  s.storage_mbit = j.value("storage_mbit", 0.0);
  s.temperature_c = j.value("temperature_c", 0.0);
  if (j.contains("boresight")) s.boresight = j["boresight"].get<Vec3>();
  if (j.contains("unavailable_until")) {
    for (const auto& [k, v] : j["unavailable_until"].items()) {
      s.unavailable_until[tasknet::parse_instrument(k)] = v.get<double>();
    }
  }
  if (j.contains("faults")) {
    for (const auto& f : j["faults"]) {
      const auto name = f.get<std::string>();
      if (name == "CameraFault") s.faults.insert(FaultFlag::CameraFault);
      else if (name == "PowerOverdraw") s.faults.insert(FaultFlag::PowerOverdraw);
      else throw DocumentError("unknown fault flag " + name);
    }
  }
  if (j.contains("instrument_modes")) {
    for (const auto& [k, v] : j["instrument_modes"].items()) {
      const auto m = v.get<std::string>();
      s.instrument_modes[tasknet::parse_instrument(k)] =
          m == "On" ? InstrumentMode::On : m == "Resetting" ? InstrumentMode::Resetting : InstrumentMode::Off;
    }
  }
  return s;
}

}  // namespace ops::simcore

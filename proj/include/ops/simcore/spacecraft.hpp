#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ops/common/json_io.hpp"
#include "ops/tasknet/types.hpp"

namespace ops::simcore {

using tasknet::InstrumentId;

using Vec3 = std::array<double, 3>;

struct Instrument {
  InstrumentId id = InstrumentId::NAC;
  double power_w = 0.0;
  double data_per_obs_mbit = 0.0;
  double fov_deg = 0.0;
  double noise_floor = 0.0;
};

enum class InstrumentMode { Off, On, Resetting };

enum class FaultFlag { CameraFault, PowerOverdraw };

struct SpacecraftState {
  double t = 0.0;
  double battery_wh = 0.0;
  double storage_mbit = 0.0;
  double temperature_c = 0.0;
  Vec3 boresight{1.0, 0.0, 0.0};
  std::map<InstrumentId, InstrumentMode> instrument_modes;
  std::set<FaultFlag> faults;
  /// Earliest time each instrument may be scheduled again (fault recovery).
  std::map<InstrumentId, double> unavailable_until;
};

enum class EvrLevel { INFO, WARN, ERROR };

struct Evr {
  double t = 0.0;
  EvrLevel level = EvrLevel::INFO;
  std::string code;
  std::map<std::string, std::string> args;
  bool operator==(const Evr&) const = default;
};

struct DataProduct {
  std::string id;
  std::string kind;
  double size_mbit = 0.0;
  double t_created = 0.0;
  std::string source_task;  // empty for engineering products
  std::int64_t priority = 0;
  bool operator==(const DataProduct&) const = default;
};

std::string_view to_string(EvrLevel l);
EvrLevel parse_evr_level(std::string_view s);
std::string_view to_string(InstrumentMode m);
std::string_view to_string(FaultFlag f);

Json to_json(const Evr& e);
Evr evr_from_json(const Json& j);
Json to_json(const DataProduct& p);
DataProduct product_from_json(const Json& j);
Json to_json(const Instrument& i);
Instrument instrument_from_json(const Json& j);
Json to_json(const SpacecraftState& s);
SpacecraftState state_from_json(const Json& j);

}  // namespace ops::simcore

#include "ops/simcore/instruments.hpp"

#include <cmath>

namespace ops::simcore {

double observation_noise(const Instrument& inst, const onboard::ExposureParams& params, double noise_scale) {
  return inst.noise_floor * noise_scale / std::sqrt(params.n_stack * params.exposure_time);
}

Observation camera_observe(const Instrument& inst, SpacecraftState& state, const onboard::ExposureParams& params,
                           double capacity_mbit, double noise_scale) {
  if (state.faults.count(FaultFlag::CameraFault))
    throw InstrumentFaulted(std::string(tasknet::to_string(inst.id)) + " is faulted");
  auto mode = state.instrument_modes.find(inst.id);
  if (mode != state.instrument_modes.end() && mode->second != InstrumentMode::On)
    throw InstrumentFaulted(std::string(tasknet::to_string(inst.id)) + " is not on");

  Observation obs;
  obs.noise_level = observation_noise(inst, params, noise_scale);
  obs.product.kind = "image";
  obs.product.size_mbit = params.n_stack * inst.data_per_obs_mbit;
  obs.product.t_created = state.t;
  if (state.storage_mbit + obs.product.size_mbit > capacity_mbit)
    throw StorageFull("product of " + std::to_string(obs.product.size_mbit) + " Mbit exceeds free storage");
  state.storage_mbit += obs.product.size_mbit;
  return obs;
}

}  // namespace ops::simcore

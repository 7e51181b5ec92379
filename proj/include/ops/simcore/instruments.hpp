#pragma once

#include "ops/common/error.hpp"
#include "ops/onboard/autonomy.hpp"
#include "ops/simcore/spacecraft.hpp"

namespace ops::simcore {

OPS_DEFINE_ERROR(InstrumentFaulted, "INSTRUMENT_FAULTED");
OPS_DEFINE_ERROR(StorageFull, "STORAGE_FULL");

struct Observation {
  DataProduct product;
  double noise_level = 0.0;
};

/// Predicted frame noise for the given exposure settings.
double observation_noise(const Instrument& inst, const onboard::ExposureParams& params, double noise_scale = 1.0);

/// Takes n_stack frames and debits storage. Throws InstrumentFaulted when the
/// camera fault flag is set and StorageFull (without debiting anything) when
/// the product does not fit in `capacity_mbit`.
Observation camera_observe(const Instrument& inst, SpacecraftState& state, const onboard::ExposureParams& params,
                           double capacity_mbit, double noise_scale = 1.0);

}  // namespace ops::simcore

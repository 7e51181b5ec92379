#pragma once

#include <optional>

#include "ops/downlink/decimate.hpp"
#include "ops/infer/explain.hpp"
#include "ops/infer/report.hpp"

namespace ops::opsd {

/// Inference over a downlinked trace. Decisions in the trace are explained
/// against `gem` when given.
infer::InferenceReport infer_downlink(const infer::StateEffectModel& sem,
                                      const std::optional<infer::GoalElaborationModel>& gem,
                                      const downlink::DownlinkTrace& actual, std::size_t beam = 32);

}  // namespace ops::opsd

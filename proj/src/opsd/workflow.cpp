#include "ops/opsd/workflow.hpp"

namespace ops::opsd {

infer::InferenceReport infer_downlink(const infer::StateEffectModel& sem,
                                      const std::optional<infer::GoalElaborationModel>& gem,
                                      const downlink::DownlinkTrace& actual, std::size_t beam) {
  if (gem) infer::check_against(*gem, sem);
  const auto telemetry = infer::extract_telemetry(sem, actual.trace);
  const int n_bins = infer::bins_for(sem, actual.trace.horizon_s);
  const auto result = infer::run_inference(sem, telemetry, n_bins, beam);
  infer::ExplanationReport explanations;
  if (gem) explanations = infer::explain_decisions(actual.trace.decisions, result, *gem);
  return infer::make_report(result, explanations);
}

}  // namespace ops::opsd

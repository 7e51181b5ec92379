#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ops/infer/model.hpp"
#include "ops/infer/solver.hpp"
#include "ops/onboard/timeline.hpp"

namespace ops::infer {

OPS_DEFINE_ERROR(ModelMismatch, "MODEL_MISMATCH");

struct InferenceResult {
  FactorGraph graph;
  std::vector<Hypothesis> hypotheses;  // ascending accumulated error
  std::map<std::string, std::vector<double>> posterior;

  const Hypothesis& top() const;
  /// Graph variable for `name` at time t (nearest bin, clamped); -1 if absent.
  int variable_at(const std::string& name, double t) const;
};

InferenceResult run_inference(const StateEffectModel& m, const Telemetry& telemetry, int n_bins,
                              std::size_t beam = 32, bool parallel = true);

struct ConditionCheck {
  Condition condition;
  std::string var_id;
  bool discrete = false;
  double ml = 0.0;  // top-hypothesis value
  std::optional<double> sigma;
  double probability = 0.0;  // discrete: posterior mass satisfying the condition
  bool holds = false;
};

struct VerdictExplanation {
  std::string goal;
  onboard::Verdict verdict = onboard::Verdict::Scheduled;
  std::string rule;
  bool rule_holds = false;
  std::vector<ConditionCheck> checks;
  std::vector<std::string> actions;
  bool consistent = true;
  std::string text;
};

struct TriggerCheck {
  std::string event;
  std::string var_id;
  int value = 1;
  int top_value = -1;
  double probability = 0.0;
  bool consistent = true;
  std::vector<std::string> evidence;  // fired detections on the variable near the decision
};

struct DecisionExplanation {
  double t = 0.0;
  int cycle = 0;
  std::string trigger;
  std::optional<TriggerCheck> trigger_check;
  std::vector<VerdictExplanation> verdicts;
};

struct Anomaly {
  double t = 0.0;
  std::string subject;  // goal id or event name
  std::string message;
  std::vector<std::string> detached;  // labels of detached factors in the top hypothesis
};

struct ExplanationReport {
  std::vector<DecisionExplanation> decisions;
  std::vector<Anomaly> anomalies;
};

/// Cites the rule behind each verdict with the inferred state it was checked
/// against, and flags verdicts and event triggers that disagree with the top
/// hypothesis. Throws ModelMismatch when a verdict's goal has no rule.
ExplanationReport explain_decision(const onboard::DecisionRecord& record, const InferenceResult& inference,
                                   const GoalElaborationModel& gem);
ExplanationReport explain_decisions(const std::vector<onboard::DecisionRecord>& records,
                                    const InferenceResult& inference, const GoalElaborationModel& gem);

Json to_json(const ExplanationReport& r);

}  // namespace ops::infer

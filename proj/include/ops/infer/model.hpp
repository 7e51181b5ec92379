#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ops/common/json_io.hpp"
#include "ops/infer/factor_graph.hpp"
#include "ops/simcore/trace.hpp"

namespace ops::infer {

inline constexpr const char* kSemSchema = "sem/1";
inline constexpr const char* kGemSchema = "gem/1";

/// continuous and discrete variables become graph variables; a signal is an
/// observed detector output that only appears through detection effects.
enum class ModelVarKind { Continuous, Discrete, Signal };

struct ModelVariable {
  std::string name;
  ModelVarKind kind = ModelVarKind::Continuous;
  int domain = 2;
  bool per_timestep = true;
  // Continuous: Gaussian prior (on bin 0 when per-timestep).
  std::optional<double> prior_mean;
  double prior_sigma = 1.0;
  // Discrete: prior over values (on bin 0 when per-timestep).
  std::vector<double> prior_probs;
};

enum class TemplateKind { RandomWalk, MeanReverting, EnergyBalance, Transition, Detection };

struct EffectTemplate {
  TemplateKind kind = TemplateKind::RandomWalk;
  double sigma = 1.0;
  double theta = 0.0;     // mean_reverting, 1/s
  double mu = 0.0;        // mean_reverting level
  double supply_w = 0.0;  // energy_balance
  std::vector<std::vector<double>> probs;  // transition
  // detection: constant rates, or a thresholded statistic N(mu[value], s)
  double p_fp = 0.0, p_fn = 0.0;
  std::string threshold;  // continuous variable name; empty for constant rates
  std::vector<double> detect_mu;
  double detect_s = 1.0;
};

struct Effect {
  std::string cause;
  std::string effect;
  EffectTemplate tmpl;
};

struct ChannelBinding {
  std::string channel;
  std::string variable;
  double sigma = 1.0;
  bool detachable = false;
  double detach_penalty = 4.5;
};

/// A commanded value for a global variable, e.g. a detector threshold upload.
/// Always detachable: the command may not have been applied.
struct Command {
  std::string variable;
  double value = 0.0;
  double sigma = 0.1;
  double t = 0.0;
  double detach_penalty = 4.5;
};

struct StateEffectModel {
  double bin_s = 60.0;
  std::vector<ModelVariable> variables;
  std::vector<Effect> effects;
  std::vector<ChannelBinding> channels;
  std::vector<Command> commands;

  const ModelVariable* find(const std::string& name) const;
  /// Every telemetry channel the model consumes (bindings and detection signals).
  std::vector<std::string> referenced_channels() const;
};

/// Parses and validates: referenced variables exist, kinds match templates,
/// within-timestep effects are acyclic.
StateEffectModel sem_from_json(const Json& j);
Json to_json(const StateEffectModel& m);

enum class CompareOp { Lt, Le, Gt, Ge, Eq, Ne };
std::string_view to_string(CompareOp op);
CompareOp parse_compare_op(std::string_view s);
bool compare(double lhs, CompareOp op, double rhs);

struct Condition {
  std::string variable;
  CompareOp op = CompareOp::Ge;
  double value = 0.0;
};

struct GoalRule {
  std::string id;
  std::string goal;
  std::vector<Condition> conditions;
  std::vector<std::string> actions;
  std::vector<onboard::Verdict> if_true;
  std::vector<onboard::Verdict> if_false;
};

/// An event trigger implies a discrete state at the trigger time.
struct TriggerRule {
  std::string event;  // e.g. "PlumeDetected"
  std::string variable;
  int value = 1;
};

struct GoalElaborationModel {
  std::vector<GoalRule> rules;
  std::vector<TriggerRule> triggers;

  const GoalRule* rule_for(const std::string& goal) const;
};

GoalElaborationModel gem_from_json(const Json& j);
Json to_json(const GoalElaborationModel& m);
/// Checks that rules reference only variables the state model declares.
void check_against(const GoalElaborationModel& gem, const StateEffectModel& sem);

using Telemetry = std::map<std::string, simcore::Channel>;

/// Channels of `trace` the model references; missing channels are empty.
/// Detection EVRs add a fired sample to "detector.<kind>" where the channel
/// has none at that time.
Telemetry extract_telemetry(const StateEffectModel& m, const simcore::SimTrace& trace);

/// One variable per (model variable x bin), process and transition factors
/// between consecutive bins, one measurement factor per telemetry sample at
/// the nearest bin, one multi-association factor per detection sample.
/// Throws ModelError for channels the model does not reference or samples
/// outside the horizon.
FactorGraph build_graph(const StateEffectModel& m, const Telemetry& telemetry, int n_bins);

/// Bins needed to cover `horizon_s`.
int bins_for(const StateEffectModel& m, double horizon_s);

}  // namespace ops::infer

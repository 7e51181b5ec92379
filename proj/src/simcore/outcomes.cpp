#include "ops/simcore/outcomes.hpp"

namespace ops::simcore {

GoalOutcome goal_outcome(const tasknet::Goal& goal, const std::map<std::string, TaskOutcome>& tasks,
                         const std::set<tasknet::EventKind>& fired_events) {
  auto outcome_of = [&](const std::string& id) {
    auto it = tasks.find(id);
    return it == tasks.end() ? TaskOutcome::Skipped : it->second;
  };
  bool all_executed = true, any_interrupted = false;
  for (const auto& id : goal.tasks) {
    const auto o = outcome_of(id);
    all_executed = all_executed && o == TaskOutcome::Executed;
    any_interrupted = any_interrupted || o == TaskOutcome::Interrupted;
  }
  if (goal.condition && !fired_events.count(goal.condition->event)) return GoalOutcome::Inactive;
  if (all_executed) return GoalOutcome::Executed;
  if (any_interrupted) return GoalOutcome::Interrupted;
  return GoalOutcome::Skipped;
}

std::map<std::string, GoalOutcome> goal_outcomes(const tasknet::TaskNetwork& net,
                                                 const std::map<std::string, TaskOutcome>& tasks,
                                                 const std::set<tasknet::EventKind>& fired_events) {
  std::map<std::string, GoalOutcome> out;
  for (const auto& [id, g] : net.goals) out[id] = goal_outcome(g, tasks, fired_events);
  return out;
}

}  // namespace ops::simcore

#pragma once

#include <map>
#include <set>
#include <string>

#include "ops/simcore/trace.hpp"
#include "ops/tasknet/types.hpp"

namespace ops::simcore {

/// Goal outcome from its tasks' outcomes: all Executed -> Executed; a
/// conditional goal whose event never fired -> Inactive; any Interrupted ->
/// Interrupted; otherwise Skipped.
GoalOutcome goal_outcome(const tasknet::Goal& goal, const std::map<std::string, TaskOutcome>& tasks,
                         const std::set<tasknet::EventKind>& fired_events);

std::map<std::string, GoalOutcome> goal_outcomes(const tasknet::TaskNetwork& net,
                                                 const std::map<std::string, TaskOutcome>& tasks,
                                                 const std::set<tasknet::EventKind>& fired_events);

}  // namespace ops::simcore

#pragma once

#include <set>

#include "ops/onboard/timeline.hpp"
#include "ops/tasknet/types.hpp"

namespace ops::onboard {

struct PlanResult {
  Timeline timeline;
  DecisionRecord record;
};

/// Priority-ordered greedy earliest insertion. Goals are visited in
/// precedence order (engine burns first, then descending priority); each
/// goal is placed atomically at the earliest instants that satisfy its
/// window, ordering, instrument exclusivity, the battery floor and the
/// storage ceiling, or skipped with a verdict explaining the blocker.
PlanResult schedule(const tasknet::TaskNetwork& net, const simcore::SpacecraftState& state,
                    const std::set<EventKind>& active_events, double horizon, const PlannerModel& model);

/// Event-driven replanning at `t_now`. Entries that ended are frozen; the
/// executing entry (started strictly before t_now) stays frozen unless the
/// trigger faults its instrument or task, in which case it is truncated and
/// marked Interrupted. Everything later is re-placed by the same priority rule.
PlanResult replan(const Timeline& current, double t_now, const Trigger& trigger, const tasknet::TaskNetwork& net,
                  const simcore::SpacecraftState& state, const std::set<EventKind>& active_events, double horizon,
                  const PlannerModel& model, int cycle = 1);

/// Planner estimate of the data volume a task produces (or drains, for
/// downlinks).
double planned_data_mbit(const tasknet::Task& task, const PlannerModel& model);

/// Projects battery and storage over [t0, horizon] for the given entries,
/// starting from the state's levels. Entries that started before t0 only
/// contribute their remaining power draw.
std::vector<ProfilePoint> project_resources(const std::vector<TimelineEntry>& entries, double t0, double horizon,
                                            const simcore::SpacecraftState& state, const PlannerModel& model);

bool within_bounds(const std::vector<ProfilePoint>& profile, const PlannerModel& model);

PlanDiff diff_entries(const std::vector<TimelineEntry>& before, const std::vector<TimelineEntry>& after);
/// Removes diff.removed from `entries` and inserts diff.added, keeping order.
std::vector<TimelineEntry> apply_diff(std::vector<TimelineEntry> entries, const PlanDiff& diff);

}  // namespace ops::onboard

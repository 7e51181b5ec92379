#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ops/common/json_io.hpp"
#include "ops/simcore/spacecraft.hpp"
#include "ops/tasknet/types.hpp"

namespace ops::onboard {

using tasknet::EventKind;
using tasknet::InstrumentId;

enum class EntryStatus { Planned, Interrupted };

struct TimelineEntry {
  std::string task_id;
  std::string goal_id;
  double t_start = 0.0;
  double t_end = 0.0;
  std::optional<std::string> resource;
  double power_w = 0.0;
  double data_mbit = 0.0;  // planner's estimate; removal volume for downlinks
  bool downlink = false;
  EntryStatus status = EntryStatus::Planned;
  bool operator==(const TimelineEntry&) const = default;
};

/// Strict weak order used to keep timelines canonical.
bool entry_less(const TimelineEntry& a, const TimelineEntry& b);

struct ProfilePoint {
  double t = 0.0;
  double battery_wh = 0.0;
  double storage_mbit = 0.0;
  bool operator==(const ProfilePoint&) const = default;
};

struct Timeline {
  std::vector<TimelineEntry> entries;   // sorted by entry_less
  std::vector<ProfilePoint> profile;    // projected resources at breakpoints

  const TimelineEntry* planned_entry(const std::string& task_id) const;
  /// Busy intervals of an exclusive resource, in time order.
  std::vector<std::pair<double, double>> busy(const std::string& resource) const;
  bool operator==(const Timeline&) const = default;
};

enum class TriggerKind { Initial, EventDetected, FaultDetected, TaskOverrun };
enum class FaultKind { CameraReset, PowerOverdraw };

struct Trigger {
  TriggerKind kind = TriggerKind::Initial;
  std::optional<EventKind> event;
  std::optional<FaultKind> fault;
  std::optional<InstrumentId> instrument;  // faulted instrument
  std::optional<std::string> task_id;      // interrupted / overrunning task
  std::optional<double> extend_to;         // overrun: new expected end

  static Trigger initial() { return {}; }
  static Trigger detected(EventKind e) {
    Trigger t;
    t.kind = TriggerKind::EventDetected;
    t.event = e;
    return t;
  }
  static Trigger instrument_fault(FaultKind f, InstrumentId i) {
    Trigger t;
    t.kind = TriggerKind::FaultDetected;
    t.fault = f;
    t.instrument = i;
    return t;
  }
  static Trigger task_fault(FaultKind f, std::string task) {
    Trigger t;
    t.kind = TriggerKind::FaultDetected;
    t.fault = f;
    t.task_id = std::move(task);
    return t;
  }
  static Trigger overrun(std::string task, double until) {
    Trigger t;
    t.kind = TriggerKind::TaskOverrun;
    t.task_id = std::move(task);
    t.extend_to = until;
    return t;
  }
  bool operator==(const Trigger&) const = default;
};

enum class Verdict { Scheduled, SkippedResource, SkippedWindow, SkippedPriority, Inactive };

struct GoalConsideration {
  std::string goal_id;
  std::int64_t priority = 0;
  Verdict verdict = Verdict::Scheduled;
  bool operator==(const GoalConsideration&) const = default;
};

struct PlanDiff {
  std::vector<TimelineEntry> added;
  std::vector<TimelineEntry> removed;
  bool empty() const { return added.empty() && removed.empty(); }
  bool operator==(const PlanDiff&) const = default;
};

struct DecisionRecord {
  double t = 0.0;
  int cycle = 0;
  Trigger trigger;
  std::vector<GoalConsideration> considered_goals;
  PlanDiff plan_diff;

  const GoalConsideration* verdict_for(const std::string& goal_id) const;
  bool operator==(const DecisionRecord&) const = default;
};

/// Resource envelope the planner enforces.
struct PlannerModel {
  double battery_capacity_wh = 100.0;
  double battery_floor_wh = 0.0;
  double storage_capacity_mbit = 1000.0;
  double supply_w = 0.0;
  double bus_load_w = 0.0;
  std::map<InstrumentId, simcore::Instrument> instruments;
  /// Extra candidate start spacing, lets a task wait for battery recharge.
  double search_step_s = 60.0;
};

std::string_view to_string(EntryStatus s);
std::string_view to_string(TriggerKind k);
std::string_view to_string(FaultKind k);
std::string_view to_string(Verdict v);
Verdict parse_verdict(std::string_view s);

Json to_json(const TimelineEntry& e);
TimelineEntry entry_from_json(const Json& j);
Json to_json(const Timeline& t);
Timeline timeline_from_json(const Json& j);
Json to_json(const Trigger& t);
Trigger trigger_from_json(const Json& j);
Json to_json(const DecisionRecord& r);
DecisionRecord decision_from_json(const Json& j);
Json to_json(const PlannerModel& m);
PlannerModel planner_model_from_json(const Json& j);

}  // namespace ops::onboard

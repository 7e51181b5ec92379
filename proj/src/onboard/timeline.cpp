#include <tuple>

#include "ops/common/error.hpp"
#include "ops/onboard/timeline.hpp"

namespace ops::onboard {

bool entry_less(const TimelineEntry& a, const TimelineEntry& b) {
  return std::tie(a.t_start, a.t_end, a.task_id, a.status) < std::tie(b.t_start, b.t_end, b.task_id, b.status);
}

const TimelineEntry* Timeline::planned_entry(const std::string& task_id) const {
  for (const auto& e : entries)
    if (e.task_id == task_id && e.status == EntryStatus::Planned) return &e;
  return nullptr;
}

std::vector<std::pair<double, double>> Timeline::busy(const std::string& resource) const {
  std::vector<std::pair<double, double>> out;
  for (const auto& e : entries)
    if (e.resource == resource) out.emplace_back(e.t_start, e.t_end);
  return out;
}

const GoalConsideration* DecisionRecord::verdict_for(const std::string& goal_id) const {
  for (const auto& c : considered_goals)
    if (c.goal_id == goal_id) return &c;
  return nullptr;
}

std::string_view to_string(EntryStatus s) {
  return s == EntryStatus::Planned ? "Planned" : "Interrupted";
}

std::string_view to_string(TriggerKind k) {
  switch (k) {
    case TriggerKind::Initial: return "Initial";
    case TriggerKind::EventDetected: return "EventDetected";
    case TriggerKind::FaultDetected: return "FaultDetected";
    case TriggerKind::TaskOverrun: return "TaskOverrun";
  }
  return "?";
}

std::string_view to_string(FaultKind k) {
  return k == FaultKind::CameraReset ? "CameraReset" : "PowerOverdraw";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Scheduled: return "Scheduled";
    case Verdict::SkippedResource: return "SkippedResource";
    case Verdict::SkippedWindow: return "SkippedWindow";
    case Verdict::SkippedPriority: return "SkippedPriority";
    case Verdict::Inactive: return "Inactive";
  }
  return "?";
}

Verdict parse_verdict(std::string_view s) {
  for (auto v : {Verdict::Scheduled, Verdict::SkippedResource, Verdict::SkippedWindow, Verdict::SkippedPriority,
                 Verdict::Inactive})
    if (to_string(v) == s) return v;
  throw DocumentError("unknown verdict \"" + std::string(s) + "\"");
}

}  // namespace ops::onboard

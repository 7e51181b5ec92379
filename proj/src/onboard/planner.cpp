#include "ops/onboard/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ops::onboard {
namespace {

using tasknet::Goal;
using tasknet::Task;
using tasknet::TaskNetwork;

constexpr double kEps = 1e-9;

struct Context {
  const TaskNetwork& net;
  const simcore::SpacecraftState& state;
  const PlannerModel& model;
  double t0;
  double horizon;
  std::set<std::string> completed;  // tasks frozen as planned before t0
};

TimelineEntry make_entry(const Task& task, double start, const PlannerModel& model) {
  TimelineEntry e;
  e.task_id = task.id;
  e.goal_id = task.goal_id;
  e.t_start = start;
  e.t_end = start + task.duration_s;
  e.resource = tasknet::exclusive_resource(task);
  e.power_w = task.power_w;
  e.data_mbit = planned_data_mbit(task, model);
  e.downlink = task.activity == tasknet::ActivityKind::Downlink;
  return e;
}

const TimelineEntry* find_planned(const std::vector<TimelineEntry>& entries, const std::string& task_id) {
  for (const auto& e : entries)
    if (e.status == EntryStatus::Planned && e.task_id == task_id) return &e;
  return nullptr;
}

bool resource_free(const std::vector<TimelineEntry>& entries, const std::optional<std::string>& resource, double s,
                   double e) {
  if (!resource) return true;
  for (const auto& o : entries) {
    if (o.resource != resource) continue;
    if (s < o.t_end - kEps && o.t_start < e - kEps) return false;
  }
  return true;
}

// Remaining tasks of a goal in an order compatible with ordering_after.
std::vector<const Task*> remaining_tasks(const Goal& goal, const Context& ctx) {
  std::vector<const Task*> pending;
  for (const auto& id : goal.tasks) {
    auto it = ctx.net.tasks.find(id);
    if (it != ctx.net.tasks.end() && !ctx.completed.count(id)) pending.push_back(&it->second);
  }
  std::sort(pending.begin(), pending.end(), [](const Task* a, const Task* b) { return a->id < b->id; });
  std::vector<const Task*> order;
  std::set<std::string> placed;
  while (!pending.empty()) {
    auto ready = std::find_if(pending.begin(), pending.end(), [&](const Task* t) {
      for (const auto& p : t->ordering_after) {
        bool in_goal = std::any_of(pending.begin(), pending.end(), [&](const Task* q) { return q->id == p; });
        if (in_goal && !placed.count(p)) return false;
      }
      return true;
    });
    if (ready == pending.end()) ready = pending.begin();  // cycles are rejected by validate
    placed.insert((*ready)->id);
    order.push_back(*ready);
    pending.erase(ready);
  }
  return order;
}

// Places all remaining tasks of `goal` on top of `base`, or fails.
std::optional<std::vector<TimelineEntry>> place_goal(const Goal& goal, const std::vector<TimelineEntry>& base,
                                                     const Context& ctx, bool check_resources) {
  std::vector<TimelineEntry> entries = base;
  const double window_start = goal.time_window ? goal.time_window->start : 0.0;
  const double window_end = goal.time_window ? goal.time_window->end : ctx.horizon;
  const double ub = std::min(window_end, ctx.horizon);

  for (const Task* task : remaining_tasks(goal, ctx)) {
    double lb = std::max(ctx.t0, window_start);
    if (task->instrument) {
      auto it = ctx.state.unavailable_until.find(*task->instrument);
      if (it != ctx.state.unavailable_until.end()) lb = std::max(lb, it->second);
    }
    for (const auto& pred : task->ordering_after) {
      const TimelineEntry* p = find_planned(entries, pred);
      if (!p) return std::nullopt;
      lb = std::max(lb, p->t_end);
    }
    const double d = task->duration_s;
    const double latest = ub - d;
    if (lb > latest + kEps) return std::nullopt;

    std::vector<double> candidates{lb};
    for (const auto& e : entries)
      if (e.t_end > lb && e.t_end <= latest + kEps) candidates.push_back(e.t_end);
    if (check_resources && ctx.model.search_step_s > 0) {
      for (double s = lb + ctx.model.search_step_s; s <= latest + kEps; s += ctx.model.search_step_s)
        candidates.push_back(s);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    const auto resource = tasknet::exclusive_resource(*task);
    bool placed = false;
    for (double s : candidates) {
      if (!resource_free(entries, resource, s, s + d)) continue;
      entries.push_back(make_entry(*task, s, ctx.model));
      if (check_resources &&
          !within_bounds(project_resources(entries, ctx.t0, ctx.horizon, ctx.state, ctx.model), ctx.model)) {
        entries.pop_back();
        continue;
      }
      placed = true;
      break;
    }
    if (!placed) return std::nullopt;
  }
  return entries;
}

bool goal_active(const Goal& g, const std::set<EventKind>& events) {
  return !g.condition || events.count(g.condition->event) > 0;
}

bool goal_complete(const Goal& g, const Context& ctx) {
  return std::all_of(g.tasks.begin(), g.tasks.end(), [&](const std::string& t) { return ctx.completed.count(t) > 0; });
}

PlanResult plan_from(std::vector<TimelineEntry> frozen, Context& ctx, const std::set<EventKind>& active_events) {
  PlanResult out;
  std::vector<TimelineEntry> entries = frozen;
  for (const Goal* goal : ctx.net.goals_by_precedence()) {
    GoalConsideration c{goal->id, goal->priority, Verdict::Scheduled};
    if (!goal_active(*goal, active_events)) {
      c.verdict = Verdict::Inactive;
    } else if (goal_complete(*goal, ctx)) {
      c.verdict = Verdict::Scheduled;
    } else if (auto placed = place_goal(*goal, entries, ctx, true)) {
      entries = std::move(*placed);
    } else if (place_goal(*goal, entries, ctx, false)) {
      c.verdict = Verdict::SkippedResource;
    } else if (place_goal(*goal, frozen, ctx, false)) {
      c.verdict = Verdict::SkippedPriority;
    } else {
      c.verdict = Verdict::SkippedWindow;
    }
    out.record.considered_goals.push_back(c);
  }
  std::sort(entries.begin(), entries.end(), entry_less);
  out.timeline.entries = std::move(entries);
  out.record.t = ctx.t0;
  return out;
}

bool interrupts(const Trigger& trigger, const TimelineEntry& e) {
  if (trigger.kind != TriggerKind::FaultDetected) return false;
  // A named task pins the interruption; otherwise whatever uses the instrument.
  if (trigger.task_id) return *trigger.task_id == e.task_id;
  return trigger.instrument && e.resource && *e.resource == tasknet::to_string(*trigger.instrument);
}

}  // namespace

double planned_data_mbit(const Task& task, const PlannerModel& model) {
  double v = task.data_rate_mbit_s * task.duration_s;
  if (task.instrument && tasknet::is_imaging(task.activity)) {
    auto it = model.instruments.find(*task.instrument);
    if (it != model.instruments.end()) v += task.parameter("n_stack", 1.0) * it->second.data_per_obs_mbit;
  }
  return v;
}

std::vector<ProfilePoint> project_resources(const std::vector<TimelineEntry>& entries, double t0, double horizon,
                                            const simcore::SpacecraftState& state, const PlannerModel& model) {
  std::vector<const TimelineEntry*> live;
  std::vector<double> times{t0, horizon};
  for (const auto& e : entries) {
    if (e.status != EntryStatus::Planned || e.t_end <= t0) continue;
    live.push_back(&e);
    if (e.t_start > t0 && e.t_start < horizon) times.push_back(e.t_start);
    if (e.t_end < horizon) times.push_back(e.t_end);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  // Data is debited when an entry starts (or at t0 if already running) and
  // downlinks credit storage when they finish.
  auto storage_delta = [&](double t) {
    double d = 0.0;
    for (const auto* e : live) {
      if (e->downlink) {
        if (e->t_end == t) d -= e->data_mbit;
      } else if (std::max(e->t_start, t0) == t) {
        d += e->data_mbit;
      }
    }
    return d;
  };

  std::vector<ProfilePoint> out;
  out.reserve(times.size());
  double battery = state.battery_wh;
  double storage = std::max(0.0, state.storage_mbit + storage_delta(times.front()));
  out.push_back({times.front(), battery, storage});
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double a = times[i - 1], b = times[i];
    double load = model.bus_load_w;
    for (const auto* e : live)
      if (std::max(e->t_start, t0) <= a && e->t_end >= b) load += e->power_w;
    battery = std::min(model.battery_capacity_wh, battery + (model.supply_w - load) * (b - a) / 3600.0);
    storage = std::max(0.0, storage + storage_delta(b));
    out.push_back({b, battery, storage});
  }
  return out;
}

bool within_bounds(const std::vector<ProfilePoint>& profile, const PlannerModel& model) {
  return std::all_of(profile.begin(), profile.end(), [&](const ProfilePoint& p) {
    return p.battery_wh >= model.battery_floor_wh - kEps && p.storage_mbit <= model.storage_capacity_mbit + kEps;
  });
}

PlanDiff diff_entries(const std::vector<TimelineEntry>& before, const std::vector<TimelineEntry>& after) {
  PlanDiff d;
  std::vector<bool> matched(after.size(), false);
  for (const auto& b : before) {
    bool found = false;
    for (std::size_t i = 0; i < after.size(); ++i) {
      if (!matched[i] && after[i] == b) {
        matched[i] = found = true;
        break;
      }
    }
    if (!found) d.removed.push_back(b);
  }
  for (std::size_t i = 0; i < after.size(); ++i)
    if (!matched[i]) d.added.push_back(after[i]);
  return d;
}

std::vector<TimelineEntry> apply_diff(std::vector<TimelineEntry> entries, const PlanDiff& diff) {
  for (const auto& r : diff.removed) {
    auto it = std::find(entries.begin(), entries.end(), r);
    if (it != entries.end()) entries.erase(it);
  }
  entries.insert(entries.end(), diff.added.begin(), diff.added.end());
  std::sort(entries.begin(), entries.end(), entry_less);
  return entries;
}

PlanResult schedule(const TaskNetwork& net, const simcore::SpacecraftState& state,
                    const std::set<EventKind>& active_events, double horizon, const PlannerModel& model) {
  Context ctx{net, state, model, state.t, horizon, {}};
  PlanResult r = plan_from({}, ctx, active_events);
  r.timeline.profile = project_resources(r.timeline.entries, ctx.t0, horizon, state, model);
  r.record.cycle = 0;
  r.record.trigger = Trigger::initial();
  r.record.plan_diff = diff_entries({}, r.timeline.entries);
  return r;
}

PlanResult replan(const Timeline& current, double t_now, const Trigger& trigger, const TaskNetwork& net,
                  const simcore::SpacecraftState& state, const std::set<EventKind>& active_events, double horizon,
                  const PlannerModel& model, int cycle) {
  Context ctx{net, state, model, t_now, horizon, {}};
  std::vector<TimelineEntry> frozen;
  for (const auto& e : current.entries) {
    const bool overrun = trigger.kind == TriggerKind::TaskOverrun && trigger.task_id == e.task_id &&
                         trigger.extend_to && e.status == EntryStatus::Planned && e.t_start <= t_now;
    if (overrun) {
      TimelineEntry kept = e;
      kept.t_end = std::max(kept.t_end, *trigger.extend_to);
      frozen.push_back(kept);
    } else if (e.status == EntryStatus::Interrupted || e.t_end <= t_now) {
      frozen.push_back(e);
    } else if (e.t_start < t_now) {
      TimelineEntry kept = e;
      if (interrupts(trigger, e)) {
        kept.t_end = t_now;
        kept.status = EntryStatus::Interrupted;
      }
      frozen.push_back(kept);
    }
    // Entries that have not started are re-placed below.
  }
  for (const auto& e : frozen)
    if (e.status == EntryStatus::Planned) ctx.completed.insert(e.task_id);

  PlanResult r = plan_from(frozen, ctx, active_events);
  for (const auto& p : current.profile)
    if (p.t < t_now) r.timeline.profile.push_back(p);
  for (const auto& p : project_resources(r.timeline.entries, t_now, horizon, state, model))
    r.timeline.profile.push_back(p);
  r.record.cycle = cycle;
  r.record.trigger = trigger;
  r.record.plan_diff = diff_entries(current.entries, r.timeline.entries);
  return r;
}

}  // namespace ops::onboard

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "ops/tasknet/tasknet.hpp"

namespace ops::tasknet {

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::IdMismatch: return "IdMismatch";
    case ViolationKind::MissingGoal: return "MissingGoal";
    case ViolationKind::DuplicateGoalRef: return "DuplicateGoalRef";
    case ViolationKind::MissingTask: return "MissingTask";
    case ViolationKind::TaskGoalMismatch: return "TaskGoalMismatch";
    case ViolationKind::DanglingOrdering: return "DanglingOrdering";
    case ViolationKind::CyclicOrdering: return "CyclicOrdering";
    case ViolationKind::DuplicatePriority: return "DuplicatePriority";
    case ViolationKind::NegativePriority: return "NegativePriority";
    case ViolationKind::NonPositiveDuration: return "NonPositiveDuration";
    case ViolationKind::NegativeResource: return "NegativeResource";
    case ViolationKind::InvalidWindow: return "InvalidWindow";
    case ViolationKind::WindowOverflow: return "WindowOverflow";
    case ViolationKind::InvalidKpi: return "InvalidKpi";
  }
  return "?";
}

bool is_referential(ViolationKind k) {
  switch (k) {
    case ViolationKind::IdMismatch:
    case ViolationKind::MissingGoal:
    case ViolationKind::DuplicateGoalRef:
    case ViolationKind::MissingTask:
    case ViolationKind::TaskGoalMismatch:
    case ViolationKind::DanglingOrdering:
      return true;
    default:
      return false;
  }
}

namespace {

struct Collector {
  std::vector<Violation> out;
  void add(ViolationKind k, std::vector<std::string> subjects, std::string message) {
    out.push_back({k, std::move(subjects), std::move(message)});
  }
};

// Strongly connected components of the ordering graph (edge pred -> task).
// Returns every component that contains a cycle, members sorted.
std::vector<std::vector<std::string>> ordering_cycles(const TaskNetwork& net) {
  std::map<std::string, int> index, low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> cycles;
  int counter = 0;

  std::function<void(const std::string&)> strongconnect = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    // Successors of v are tasks that list v in ordering_after; walking the
    // reverse direction yields the same components.
    for (const auto& w : net.tasks.at(v).ordering_after) {
      if (!net.tasks.count(w)) continue;
      if (!index.count(w)) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> comp;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        comp.push_back(w);
      } while (w != v);
      const auto& preds = net.tasks.at(v).ordering_after;
      const bool self_loop = std::find(preds.begin(), preds.end(), v) != preds.end();
      if (comp.size() > 1 || self_loop) {
        std::sort(comp.begin(), comp.end());
        cycles.push_back(std::move(comp));
      }
    }
  };

  for (const auto& [id, t] : net.tasks)
    if (!index.count(id)) strongconnect(id);
  std::sort(cycles.begin(), cycles.end());
  return cycles;
}

std::string fmt_seconds(double s) {
  std::ostringstream os;
  os << s << " s";
  return os.str();
}

void check_windows(const TaskNetwork& net, Collector& c) {
  // Per-resource load of each windowed goal must fit the window.
  for (const auto& [gid, g] : net.goals) {
    if (!g.time_window || g.time_window->length() <= 0) continue;
    std::map<std::string, double> load;
    for (const auto& tid : g.tasks) {
      auto it = net.tasks.find(tid);
      if (it == net.tasks.end()) continue;
      if (auto r = exclusive_resource(it->second)) load[*r] += it->second.duration_s;
    }
    for (const auto& [res, total] : load) {
      if (total > g.time_window->length() + 1e-9) {
        c.add(ViolationKind::WindowOverflow, {gid},
              "goal " + gid + " needs " + fmt_seconds(total) + " of " + res + " inside a " +
                  fmt_seconds(g.time_window->length()) + " window");
        break;
      }
    }
  }

  // Earliest-finish propagation along ordering chains (acyclic nets only).
  std::map<std::string, double> earliest_start;
  std::set<std::string> reported;
  std::function<double(const std::string&)> finish = [&](const std::string& tid) -> double {
    if (auto it = earliest_start.find(tid); it != earliest_start.end()) {
      return it->second + net.tasks.at(tid).duration_s;
    }
    const Task& t = net.tasks.at(tid);
    double es = 0.0;
    if (auto g = net.goals.find(t.goal_id); g != net.goals.end() && g->second.time_window) {
      es = g->second.time_window->start;
    }
    for (const auto& p : t.ordering_after)
      if (net.tasks.count(p)) es = std::max(es, finish(p));
    earliest_start[tid] = es;
    return es + t.duration_s;
  };
  for (const auto& [tid, t] : net.tasks) {
    const double f = finish(tid);
    auto g = net.goals.find(t.goal_id);
    if (g == net.goals.end() || !g->second.time_window) continue;
    if (f > g->second.time_window->end + 1e-9 && !reported.count(g->first)) {
      const bool already = std::any_of(c.out.begin(), c.out.end(), [&](const Violation& v) {
        return v.kind == ViolationKind::WindowOverflow && v.subjects.front() == g->first;
      });
      if (!already) {
        c.add(ViolationKind::WindowOverflow, {g->first, tid},
              "ordering chain ending at task " + tid + " finishes at " + fmt_seconds(f) +
                  ", after goal " + g->first + " window end");
      }
      reported.insert(g->first);
    }
  }
}

}  // namespace

std::vector<Violation> validate(const TaskNetwork& net) {
  Collector c;

  for (const auto& [key, g] : net.goals)
    if (key != g.id) c.add(ViolationKind::IdMismatch, {key, g.id}, "goal keyed " + key + " has id " + g.id);
  for (const auto& [key, t] : net.tasks)
    if (key != t.id) c.add(ViolationKind::IdMismatch, {key, t.id}, "task keyed " + key + " has id " + t.id);

  for (const auto& camp : net.campaigns) {
    std::set<std::string> seen;
    for (const auto& gid : camp.goal_ids) {
      if (!seen.insert(gid).second) {
        c.add(ViolationKind::DuplicateGoalRef, {camp.id, gid}, "campaign " + camp.id + " lists " + gid + " twice");
      }
      if (!net.goals.count(gid)) {
        c.add(ViolationKind::MissingGoal, {camp.id, gid}, "campaign " + camp.id + " references missing goal " + gid);
      }
    }
    for (const auto& kpi : camp.kpis) {
      const auto& pts = kpi.progress_points;
      bool ok = !pts.empty() && pts.front().count == 0.0 && pts.front().percent == 0.0;
      for (std::size_t i = 1; ok && i < pts.size(); ++i) {
        ok = pts[i].count > pts[i - 1].count && pts[i].percent > pts[i - 1].percent;
      }
      if (!ok) {
        c.add(ViolationKind::InvalidKpi, {kpi.id},
              "kpi " + kpi.id + " breakpoints must start at (0,0) and increase strictly");
      }
    }
  }

  std::map<std::int64_t, std::vector<std::string>> by_priority;
  for (const auto& [gid, g] : net.goals) {
    by_priority[g.priority].push_back(gid);
    if (g.priority < 0) c.add(ViolationKind::NegativePriority, {gid}, "goal " + gid + " has negative priority");
    if (g.time_window && !(g.time_window->end > g.time_window->start)) {
      c.add(ViolationKind::InvalidWindow, {gid}, "goal " + gid + " window end must exceed start");
    }
    for (const auto& tid : g.tasks) {
      auto it = net.tasks.find(tid);
      if (it == net.tasks.end()) {
        c.add(ViolationKind::MissingTask, {gid, tid}, "goal " + gid + " references missing task " + tid);
      } else if (it->second.goal_id != gid) {
        c.add(ViolationKind::TaskGoalMismatch, {gid, tid},
              "goal " + gid + " lists task " + tid + " owned by " + it->second.goal_id);
      }
    }
  }
  for (const auto& [prio, ids] : by_priority) {
    if (ids.size() > 1) {
      c.add(ViolationKind::DuplicatePriority, ids, "priority " + std::to_string(prio) + " is shared");
    }
  }

  for (const auto& [tid, t] : net.tasks) {
    auto g = net.goals.find(t.goal_id);
    if (g == net.goals.end()) {
      c.add(ViolationKind::TaskGoalMismatch, {t.goal_id, tid}, "task " + tid + " belongs to missing goal " + t.goal_id);
    } else if (std::find(g->second.tasks.begin(), g->second.tasks.end(), tid) == g->second.tasks.end()) {
      c.add(ViolationKind::TaskGoalMismatch, {t.goal_id, tid}, "goal " + t.goal_id + " does not list task " + tid);
    }
    if (!(t.duration_s > 0.0) || !std::isfinite(t.duration_s)) {
      c.add(ViolationKind::NonPositiveDuration, {tid}, "task " + tid + " duration must be > 0");
    }
    if (t.power_w < 0.0 || t.data_rate_mbit_s < 0.0) {
      c.add(ViolationKind::NegativeResource, {tid}, "task " + tid + " has negative power or data rate");
    }
    for (const auto& p : t.ordering_after) {
      if (!net.tasks.count(p)) {
        c.add(ViolationKind::DanglingOrdering, {tid, p}, "task " + tid + " ordered after missing task " + p);
      }
    }
  }

  const auto cycles = ordering_cycles(net);
  for (const auto& cyc : cycles) {
    std::string members;
    for (const auto& m : cyc) members += (members.empty() ? "" : ", ") + m;
    c.add(ViolationKind::CyclicOrdering, cyc, "ordering cycle among {" + members + "}");
  }
  if (cycles.empty()) check_windows(net, c);

  return std::move(c.out);
}

}  // namespace ops::tasknet

#pragma once

#include <algorithm>
#include <numeric>

#include "ops/common/rng.hpp"
#include "support/builders.hpp"

namespace ops::testing {

/// A valid random network: unique priorities, acyclic ordering inside goals.
inline TaskNetwork random_net(Rng& rng, int n_goals, int max_tasks = 3) {
  TaskNetwork net = empty_net("rnd", 1);
  std::vector<std::int64_t> prios(static_cast<std::size_t>(n_goals));
  std::iota(prios.begin(), prios.end(), 1);
  for (std::size_t i = prios.size(); i > 1; --i) std::swap(prios[i - 1], prios[rng.below(i)]);
  const InstrumentId insts[] = {InstrumentId::WAC, InstrumentId::NAC, InstrumentId::SubMmSpec,
                                InstrumentId::PlasmaParticles};
  Campaign camp{"C1", "campaign", {}, {}};
  for (int g = 0; g < n_goals; ++g) {
    const std::string gid = "G" + std::to_string(g);
    std::vector<Task> tasks;
    const int nt = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_tasks)));
    for (int k = 0; k < nt; ++k) {
      Task t = make_task(gid + "T" + std::to_string(k), gid, 10.0 + static_cast<double>(rng.below(50)),
                         static_cast<double>(rng.below(40)), insts[rng.below(4)]);
      if (k > 0 && rng.bernoulli(0.5)) t.ordering_after.push_back(gid + "T" + std::to_string(k - 1));
      if (rng.bernoulli(0.3)) t.parameters["n_stack"] = static_cast<double>(1 + rng.below(4));
      tasks.push_back(t);
    }
    Goal& goal = add_goal(net, gid, prios[static_cast<std::size_t>(g)], tasks);
    if (rng.bernoulli(0.2)) goal.condition = EventCondition{EventKind::PlumeDetected};
    if (rng.bernoulli(0.3)) goal.time_window = TimeWindow{0.0, 10000.0};
    camp.goal_ids.push_back(gid);
  }
  camp.kpis.push_back({"K1", "plumes", {CounterSource::Evr, "PLUME_DETECTED"}, {{0, 0}, {10, 100}}});
  net.campaigns.push_back(camp);
  return net;
}

/// One random edit producing a descendant revision.
inline TaskNetwork random_edit(const TaskNetwork& base, Rng& rng, const std::string& tag) {
  TaskNetwork n = base;
  n.revision = base.revision + 1;
  std::vector<std::string> task_ids;
  for (const auto& [id, t] : n.tasks) task_ids.push_back(id);
  std::vector<std::string> goal_ids;
  for (const auto& [id, g] : n.goals) goal_ids.push_back(id);
  switch (rng.below(5)) {
    case 0: {
      auto& t = n.tasks[task_ids[rng.below(task_ids.size())]];
      t.duration_s += 1.0 + static_cast<double>(rng.below(3));
      break;
    }
    case 1: {
      auto& t = n.tasks[task_ids[rng.below(task_ids.size())]];
      t.power_w += 1.0 + static_cast<double>(rng.below(3));
      break;
    }
    case 2: {
      auto& g = n.goals[goal_ids[rng.below(goal_ids.size())]];
      g.name = g.name + "-" + tag + std::to_string(rng.below(2));
      break;
    }
    case 3: {
      const std::string gid = "N" + tag;
      std::int64_t top = 0;
      for (const auto& [id, g] : n.goals) top = std::max(top, g.priority);
      add_goal(n, gid, top + 1 + static_cast<std::int64_t>(rng.below(2)), {make_task(gid + "T", gid, 30.0)});
      break;
    }
    default: {
      auto& g = n.goals[goal_ids[rng.below(goal_ids.size())]];
      g.author_history.push_back({tag, "2026-01-01T00:00:00Z", "edit"});
      break;
    }
  }
  return n;
}

}  // namespace ops::testing

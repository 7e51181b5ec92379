#pragma once

#include <algorithm>
#include <numeric>

#include "ops/common/rng.hpp"
#include "ops/onboard/planner.hpp"
#include "oracles/schedule_oracle.hpp"
#include "support/builders.hpp"

namespace ops::testing {

/// Random single-task-per-goal scheduling problem. Supply equals bus load so
/// energy use is additive and the oracle's budget check is exact.
struct ScheduleInstance {
  tasknet::TaskNetwork net;
  onboard::PlannerModel model;
  simcore::SpacecraftState state;
  double horizon = 3000.0;
  std::vector<oracle::Job> jobs;
  oracle::Budget budget;
};

inline ScheduleInstance random_schedule_instance(Rng& rng, int n_goals, bool wide_windows) {
  ScheduleInstance inst;
  inst.net = empty_net("sched");
  inst.model.supply_w = 20.0;
  inst.model.bus_load_w = 20.0;
  inst.model.battery_capacity_wh = 200.0;
  inst.model.battery_floor_wh = 10.0;
  inst.model.storage_capacity_mbit = 50.0 + 150.0 * rng.uniform();
  inst.state.battery_wh = 10.0 + 40.0 + 60.0 * rng.uniform();

  std::vector<std::int64_t> prios(n_goals);
  std::iota(prios.begin(), prios.end(), 1);
  for (int i = n_goals - 1; i > 0; --i) std::swap(prios[i], prios[rng.below(i + 1)]);

  const InstrumentId instruments[] = {InstrumentId::WAC, InstrumentId::NAC, InstrumentId::SubMmSpec};
  for (int i = 0; i < n_goals; ++i) {
    const std::string gid = "g" + std::to_string(i);
    const double duration = 100.0 + 500.0 * rng.uniform();
    const double energy = 5.0 + 35.0 * rng.uniform();
    const InstrumentId instrument = instruments[rng.below(wide_windows ? 3 : 2)];
    auto task = make_task("t" + std::to_string(i), gid, duration, energy * 3600.0 / duration, instrument);
    task.data_rate_mbit_s = (5.0 + 60.0 * rng.uniform()) / duration;
    auto& goal = add_goal(inst.net, gid, prios[i], {task});
    double ws = 0.0, we = inst.horizon;
    if (!wide_windows) {
      const double len = duration + (inst.horizon - duration) * rng.uniform();
      ws = (inst.horizon - len) * rng.uniform();
      we = ws + len;
      goal.time_window = tasknet::TimeWindow{ws, we};
    }
    const auto& t = inst.net.tasks.at(task.id);
    inst.jobs.push_back({gid, prios[i], std::string(tasknet::to_string(instrument)), ws, we, duration,
                         t.power_w * t.duration_s / 3600.0, t.data_rate_mbit_s * t.duration_s});
  }
  inst.budget = {inst.state.battery_wh - inst.model.battery_floor_wh, inst.model.storage_capacity_mbit, 0.0};
  return inst;
}

}  // namespace ops::testing

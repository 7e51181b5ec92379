#include <doctest.h>

#include <cmath>

#include "ops/onboard/autonomy.hpp"
#include "ops/onboard/planner.hpp"
#include "support/schedule_instances.hpp"

using namespace ops;
using namespace ops::onboard;
using ops::testing::add_goal;
using ops::testing::empty_net;
using ops::testing::make_task;

namespace {

PlannerModel roomy_model() {
  PlannerModel m;
  m.battery_capacity_wh = 500.0;
  m.storage_capacity_mbit = 1e6;
  return m;
}

simcore::SpacecraftState state_at(double t, double battery = 400.0) {
  simcore::SpacecraftState s;
  s.t = t;
  s.battery_wh = battery;
  return s;
}

std::vector<std::string> scheduled_goals(const DecisionRecord& r) {
  std::vector<std::string> out;
  for (const auto& c : r.considered_goals)
    if (c.verdict == Verdict::Scheduled) out.push_back(c.goal_id);
  std::sort(out.begin(), out.end());
  return out;
}

// Three mapping swaths on the WAC, highest priority first.
tasknet::TaskNetwork mapping_net(double window_end) {
  auto net = empty_net("mapping");
  int prio = 30;
  for (int i = 1; i <= 3; ++i) {
    auto& g = add_goal(net, "swath" + std::to_string(i), prio,
                       {make_task("map" + std::to_string(i), "", 400.0, 10.0, tasknet::InstrumentId::WAC,
                                  tasknet::ActivityKind::MapSwath)});
    g.time_window = tasknet::TimeWindow{0.0, window_end};
    prio -= 10;
  }
  return net;
}

void check_timeline_invariants(const Timeline& tl, const tasknet::TaskNetwork& net, const PlannerModel& m) {
  for (std::size_t i = 0; i < tl.entries.size(); ++i) {
    const auto& a = tl.entries[i];
    CHECK(a.t_start <= a.t_end);
    if (a.status == EntryStatus::Planned) {
      const auto& g = net.goals.at(a.goal_id);
      if (g.time_window) {
        CHECK(a.t_start >= g.time_window->start - 1e-9);
        CHECK(a.t_end <= g.time_window->end + 1e-9);
      }
      for (const auto& pred : net.tasks.at(a.task_id).ordering_after) {
        const auto* p = tl.planned_entry(pred);
        REQUIRE(p != nullptr);
        CHECK(p->t_end <= a.t_start + 1e-9);
      }
    }
    for (std::size_t j = i + 1; j < tl.entries.size(); ++j) {
      const auto& b = tl.entries[j];
      if (a.resource && a.resource == b.resource) CHECK((a.t_end <= b.t_start + 1e-9 || b.t_end <= a.t_start + 1e-9));
    }
  }
  CHECK(within_bounds(tl.profile, m));
}

}  // namespace

TEST_CASE("empty network gives an empty timeline") {
  auto r = schedule(empty_net(), state_at(0), {}, 1000.0, roomy_model());
  CHECK(r.timeline.entries.empty());
  CHECK(r.record.considered_goals.empty());
  CHECK(r.record.cycle == 0);
}

TEST_CASE("disjoint instruments with ample resources both schedule") {
  auto net = empty_net();
  add_goal(net, "a", 2, {make_task("ta", "", 100, 5, tasknet::InstrumentId::WAC)});
  add_goal(net, "b", 1, {make_task("tb", "", 100, 5, tasknet::InstrumentId::NAC)});
  auto r = schedule(net, state_at(0), {}, 1000.0, roomy_model());
  CHECK(scheduled_goals(r.record) == std::vector<std::string>{"a", "b"});
  CHECK(r.timeline.planned_entry("ta")->t_start == 0.0);
  CHECK(r.timeline.planned_entry("tb")->t_start == 0.0);
}

TEST_CASE("P10/P5/P1 at 60 Wh each with 130 Wh available") {
  auto net = empty_net();
  const tasknet::InstrumentId inst[] = {tasknet::InstrumentId::WAC, tasknet::InstrumentId::NAC,
                                         tasknet::InstrumentId::SubMmSpec};
  const std::int64_t prios[] = {10, 5, 1};
  std::vector<oracle::Job> jobs;
  for (int i = 0; i < 3; ++i) {
    const std::string id = "P" + std::to_string(prios[i]);
    add_goal(net, id, prios[i], {make_task("t" + id, "", 3600.0, 60.0, inst[i])});
    jobs.push_back({id, prios[i], std::string(tasknet::to_string(inst[i])), 0, 10000, 3600.0, 60.0, 0.0});
  }
  PlannerModel m = roomy_model();
  m.battery_floor_wh = 20.0;
  auto r = schedule(net, state_at(0, 150.0), {}, 10000.0, m);

  const auto expected = oracle::lexmax_subset(jobs, {130.0, 1e6, 0.0});
  CHECK(expected == std::vector<std::string>{"P10", "P5"});
  CHECK(scheduled_goals(r.record) == expected);
  CHECK(r.record.verdict_for("P1")->verdict == Verdict::SkippedResource);
}

TEST_CASE("goals are considered in descending priority with engine burns first") {
  auto net = empty_net();
  add_goal(net, "low", 1, {make_task("t1", "", 10)});
  add_goal(net, "high", 9, {make_task("t2", "", 10)});
  add_goal(net, "burn", 0, {make_task("t3", "", 10, 0, std::nullopt, tasknet::ActivityKind::EngineBurn)});
  auto r = schedule(net, state_at(0), {}, 100.0, roomy_model());
  REQUIRE(r.record.considered_goals.size() == 3);
  CHECK(r.record.considered_goals[0].goal_id == "burn");
  CHECK(r.record.considered_goals[1].goal_id == "high");
  CHECK(r.record.considered_goals[2].goal_id == "low");
}

TEST_CASE("conditional goal without its event is Inactive") {
  auto net = empty_net();
  auto& g = add_goal(net, "plume", 100, {make_task("obs", "", 60, 5, tasknet::InstrumentId::NAC)});
  g.condition = tasknet::EventCondition{tasknet::EventKind::PlumeDetected};
  auto r = schedule(net, state_at(0), {}, 1000.0, roomy_model());
  CHECK(r.record.verdict_for("plume")->verdict == Verdict::Inactive);
  CHECK(r.timeline.entries.empty());
  auto r2 = schedule(net, state_at(0), {tasknet::EventKind::PlumeDetected}, 1000.0, roomy_model());
  CHECK(r2.record.verdict_for("plume")->verdict == Verdict::Scheduled);
}

TEST_CASE("window, ordering and priority verdicts") {
  auto net = empty_net();
  auto& hi = add_goal(net, "hi", 10, {make_task("a", "", 100, 1, tasknet::InstrumentId::WAC)});
  hi.time_window = tasknet::TimeWindow{0, 100};
  auto& lo = add_goal(net, "lo", 5, {make_task("b", "", 100, 1, tasknet::InstrumentId::WAC)});
  lo.time_window = tasknet::TimeWindow{0, 150};
  auto& tight = add_goal(net, "tight", 1, {make_task("c", "", 100, 1)});
  tight.time_window = tasknet::TimeWindow{900, 950};
  auto& chain = add_goal(net, "chain", 3, {make_task("d1", "", 50, 1, tasknet::InstrumentId::NAC),
                                           make_task("d2", "", 50, 1, tasknet::InstrumentId::NAC)});
  (void)chain;
  net.tasks["d2"].ordering_after = {"d1"};
  auto r = schedule(net, state_at(0), {}, 1000.0, roomy_model());
  CHECK(r.record.verdict_for("hi")->verdict == Verdict::Scheduled);
  CHECK(r.record.verdict_for("lo")->verdict == Verdict::SkippedPriority);
  CHECK(r.record.verdict_for("tight")->verdict == Verdict::SkippedWindow);
  CHECK(r.record.verdict_for("chain")->verdict == Verdict::Scheduled);
  CHECK(r.timeline.planned_entry("d2")->t_start == doctest::Approx(50.0));
  check_timeline_invariants(r.timeline, net, roomy_model());
}

TEST_CASE("storage ceiling skips a goal on resources") {
  auto net = empty_net();
  auto t1 = make_task("a", "", 100, 1, tasknet::InstrumentId::WAC);
  t1.data_rate_mbit_s = 6.0;
  auto t2 = make_task("b", "", 100, 1, tasknet::InstrumentId::NAC);
  t2.data_rate_mbit_s = 6.0;
  add_goal(net, "first", 2, {t1});
  add_goal(net, "second", 1, {t2});
  auto m = roomy_model();
  m.storage_capacity_mbit = 1000.0;
  auto r = schedule(net, state_at(0), {}, 1000.0, m);
  CHECK(r.record.verdict_for("first")->verdict == Verdict::Scheduled);
  CHECK(r.record.verdict_for("second")->verdict == Verdict::SkippedResource);
}

TEST_CASE("a task waits for the battery to recharge") {
  auto net = empty_net();
  add_goal(net, "g", 1, {make_task("t", "", 360, 100, tasknet::InstrumentId::WAC)});
  PlannerModel m = roomy_model();
  m.supply_w = 50.0;
  m.bus_load_w = 20.0;
  m.battery_floor_wh = 10.0;
  // Needs (100+20-50) W * 0.1 h = 7 Wh above the floor; starts with 2 Wh spare
  // and gains 30 W, so it can start once 5 Wh accrued: 600 s.
  auto r = schedule(net, state_at(0, 12.0), {}, 3600.0, m);
  REQUIRE(r.record.verdict_for("g")->verdict == Verdict::Scheduled);
  const double start = r.timeline.planned_entry("t")->t_start;
  CHECK(start >= 600.0 - 1e-9);
  CHECK(start <= 600.0 + m.search_step_s);
  check_timeline_invariants(r.timeline, net, m);
}

TEST_CASE("replan without new information is a fixed point") {
  auto net = mapping_net(3000.0);
  auto m = roomy_model();
  auto r0 = schedule(net, state_at(0), {}, 3000.0, m);
  for (double t_now : {0.0, 200.0, 400.0, 1000.0}) {
    auto r1 = replan(r0.timeline, t_now, Trigger::detected(tasknet::EventKind::StormDetected), net, state_at(t_now), {},
                     3000.0, m);
    CHECK(r1.timeline.entries == r0.timeline.entries);
    CHECK(r1.record.plan_diff.empty());
  }
}

TEST_CASE("plume detection displaces the lowest-priority swath") {
  auto net = mapping_net(1200.0);
  auto& plume = add_goal(net, "plume_obs", 100,
                         {make_task("plume_img", "", 300, 10, tasknet::InstrumentId::WAC)});
  plume.condition = tasknet::EventCondition{tasknet::EventKind::PlumeDetected};
  plume.time_window = tasknet::TimeWindow{300.0, 900.0};  // plume visibility
  auto m = roomy_model();
  auto r0 = schedule(net, state_at(0), {}, 2000.0, m);
  CHECK(scheduled_goals(r0.record) == std::vector<std::string>{"swath1", "swath2", "swath3"});

  auto r1 = replan(r0.timeline, 300.0, Trigger::detected(tasknet::EventKind::PlumeDetected), net, state_at(300.0),
                   {tasknet::EventKind::PlumeDetected}, 2000.0, m, 1);
  CHECK(r1.record.verdict_for("plume_obs")->verdict == Verdict::Scheduled);
  CHECK(r1.timeline.planned_entry("map1")->t_start == 0.0);  // executing, frozen

  // Oracle over the remaining window [400, 1200] with swath1 already flown.
  std::vector<oracle::Job> jobs{{"plume_obs", 100, "WAC", 300, 900, 300, 0, 0},
                                {"swath2", 20, "WAC", 0, 1200, 400, 0, 0},
                                {"swath3", 10, "WAC", 0, 1200, 400, 0, 0}};
  auto expected = oracle::lexmax_subset(jobs, {1e9, 1e9, 400.0});
  expected.push_back("swath1");
  std::sort(expected.begin(), expected.end());
  CHECK(scheduled_goals(r1.record) == expected);
  CHECK(r1.record.verdict_for("swath3")->verdict != Verdict::Scheduled);
  check_timeline_invariants(r1.timeline, net, m);
}

TEST_CASE("camera reset interrupts mapping and drops the lowest swath") {
  auto net = mapping_net(1800.0);
  auto m = roomy_model();
  auto r0 = schedule(net, state_at(0), {}, 1800.0, m);
  REQUIRE(scheduled_goals(r0.record).size() == 3);

  auto state = state_at(200.0);
  state.unavailable_until[tasknet::InstrumentId::WAC] = 800.0;
  auto r1 = replan(r0.timeline, 200.0,
                   Trigger::instrument_fault(FaultKind::CameraReset, tasknet::InstrumentId::WAC), net, state, {},
                   1800.0, m, 1);
  const auto interrupted = std::find_if(r1.timeline.entries.begin(), r1.timeline.entries.end(),
                                        [](const TimelineEntry& e) { return e.status == EntryStatus::Interrupted; });
  REQUIRE(interrupted != r1.timeline.entries.end());
  CHECK(interrupted->task_id == "map1");
  CHECK(interrupted->t_end == 200.0);

  std::vector<oracle::Job> jobs;
  for (int i = 1; i <= 3; ++i)
    jobs.push_back({"swath" + std::to_string(i), 40 - 10 * i, "WAC", 800, 1800, 400, 0, 0});
  CHECK(scheduled_goals(r1.record) == oracle::lexmax_subset(jobs, {1e9, 1e9, 800.0}));
  CHECK(r1.record.verdict_for("swath3")->verdict == Verdict::SkippedPriority);
}

TEST_CASE("overrun extends the executing entry") {
  auto net = mapping_net(3000.0);
  auto r0 = schedule(net, state_at(0), {}, 3000.0, roomy_model());
  auto r1 = replan(r0.timeline, 400.0, Trigger::overrun("map1", 450.0), net, state_at(400.0), {}, 3000.0,
                   roomy_model());
  CHECK(r1.timeline.planned_entry("map1")->t_end == 450.0);
  CHECK(r1.timeline.planned_entry("map2")->t_start == 450.0);
}

TEST_CASE("replan properties over random event sequences") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    auto inst = ops::testing::random_schedule_instance(rng, 2 + static_cast<int>(rng.below(5)), trial % 2 == 0);
    // Make some goals conditional so events change the plan.
    for (auto& [id, g] : inst.net.goals)
      if (rng.bernoulli(0.3)) g.condition = tasknet::EventCondition{tasknet::EventKind::PlumeDetected};
    auto r = schedule(inst.net, inst.state, {}, inst.horizon, inst.model);
    check_timeline_invariants(r.timeline, inst.net, inst.model);
    std::vector<DecisionRecord> log{r.record};
    Timeline current = r.timeline;
    std::set<tasknet::EventKind> events;
    double t = 0.0;
    for (int cycle = 1; cycle <= 3; ++cycle) {
      t += 200.0 + 600.0 * rng.uniform();
      Trigger trig = rng.bernoulli(0.5) ? Trigger::detected(tasknet::EventKind::PlumeDetected)
                                        : Trigger::instrument_fault(FaultKind::CameraReset, tasknet::InstrumentId::WAC);
      if (trig.event) events.insert(*trig.event);
      auto state = inst.state;
      state.t = t;
      auto next = replan(current, t, trig, inst.net, state, events, inst.horizon, inst.model, cycle);
      // Frozen past.
      for (const auto& e : current.entries) {
        if (e.t_end < t) CHECK(std::find(next.timeline.entries.begin(), next.timeline.entries.end(), e) !=
                               next.timeline.entries.end());
      }
      // Every active goal appears exactly once.
      CHECK(next.record.considered_goals.size() == inst.net.goals.size());
      log.push_back(next.record);
      current = next.timeline;
    }
    std::vector<TimelineEntry> rebuilt;
    for (const auto& rec : log) rebuilt = apply_diff(rebuilt, rec.plan_diff);
    CHECK(rebuilt == current.entries);
  }
}

TEST_CASE("resource skips respect priority dominance against the exhaustive oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const bool wide = trial % 2 == 0;
    auto inst = ops::testing::random_schedule_instance(rng, 1 + static_cast<int>(rng.below(6)), wide);
    auto r = schedule(inst.net, inst.state, {}, inst.horizon, inst.model);
    check_timeline_invariants(r.timeline, inst.net, inst.model);

    std::vector<oracle::Job> chosen;
    for (const auto& j : inst.jobs)
      if (r.record.verdict_for(j.id)->verdict == Verdict::Scheduled) chosen.push_back(j);
    CHECK(oracle::feasible(chosen, inst.budget));

    for (const auto& g : inst.jobs) {
      if (r.record.verdict_for(g.id)->verdict != Verdict::SkippedResource) continue;
      for (const auto& l : chosen) {
        if (l.priority >= g.priority) continue;
        std::vector<oracle::Job> swapped;
        for (const auto& c : chosen)
          if (c.id != l.id) swapped.push_back(c);
        swapped.push_back(g);
        CHECK_MESSAGE(!oracle::feasible(swapped, inst.budget), "trial ", trial, " goal ", g.id, " lost to ", l.id);
      }
    }
    if (wide) CHECK(scheduled_goals(r.record) == oracle::lexmax_subset(inst.jobs, inst.budget));
  }
}

TEST_CASE("timeline and decision JSON round-trip") {
  auto net = mapping_net(1800.0);
  auto r0 = schedule(net, state_at(0), {}, 1800.0, roomy_model());
  auto r1 = replan(r0.timeline, 200.0, Trigger::instrument_fault(FaultKind::CameraReset, tasknet::InstrumentId::WAC),
                   net, state_at(200.0), {}, 1800.0, roomy_model(), 1);
  CHECK(timeline_from_json(to_json(r1.timeline)) == r1.timeline);
  CHECK(decision_from_json(to_json(r1.record)) == r1.record);
  CHECK(trigger_from_json(to_json(Trigger::overrun("x", 5.0))) == Trigger::overrun("x", 5.0));
}

TEST_CASE("detector flips with the configured rates") {
  Rng rng(5);
  Detector perfect{DetectorKind::Plume, 1.0, 0.0, 0.0};
  for (int i = 0; i < 100; ++i) {
    CHECK(detect(perfect, true, rng));
    CHECK_FALSE(detect(perfect, false, rng));
  }
  Detector noisy{DetectorKind::Plume, 1.0, 0.1, 0.0};
  int positives = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) positives += detect(noisy, false, rng);
  const double bound = 3.0 * std::sqrt(0.1 * 0.9 / n);
  CHECK(std::abs(positives / double(n) - 0.1) <= bound);
  CHECK_THROWS(detector_from_json(Json{{"kind", "plume"}, {"p_fp", 1.5}}));
}

TEST_CASE("mag mode switch uses a >= threshold") {
  CHECK(adapt_mag_mode(0.0, 4.0) == MagMode::BinnedLowRate);
  CHECK(adapt_mag_mode(4.0, 4.0) == MagMode::LosslessHighRate);
}

TEST_CASE("mag mode follows an OU process with twice-threshold variance") {
  // Exact OU discretisation: x' = x e^{-theta dt} + sigma sqrt((1-e^{-2 theta dt})/(2 theta)) z.
  const double theta = 0.05, threshold = 4.0;
  const double sigma = std::sqrt(2.0 * theta * 2.0 * threshold);  // stationary variance 2*threshold
  const double a = std::exp(-theta), s = sigma * std::sqrt((1 - a * a) / (2 * theta));
  Rng rng(11);
  double x = 0.0;
  int high = 0;
  for (int w = 0; w < 1000; ++w) {
    double sum = 0, sum2 = 0;
    const int n = 300;
    for (int i = 0; i < n; ++i) {
      x = x * a + s * rng.normal();
      sum += x;
      sum2 += x * x;
    }
    // Variance about the known mean (0), as the onboard detector does.
    high += adapt_mag_mode(sum2 / n, threshold) == MagMode::LosslessHighRate;
  }
  CHECK(high >= 800);
}

TEST_CASE("exposure tuning") {
  const ExposureParams cur{2.0, 1.0};
  auto same = tune_exposure(0.5, 1.0, 100.0, cur, 4.0);
  CHECK(same.params == cur);
  CHECK_FALSE(same.budget_limited);

  auto quad = tune_exposure(1.0, 0.5, 1000.0, cur, 4.0);
  CHECK(quad.params.n_stack == 4.0);
  CHECK(quad.params.exposure_time == 2.0);
  CHECK_FALSE(quad.budget_limited);

  auto capped = tune_exposure(1.0, 0.1, 10.0, cur, 4.0);  // budget allows n_stack 2
  CHECK(capped.budget_limited);
  CHECK(capped.params.n_stack == 2.0);
}

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include <unistd.h>

#include "ops/common/rng.hpp"
#include "ops/simcore/environment.hpp"
#include "ops/simcore/ephemeris.hpp"
#include "ops/simcore/evr_codes.hpp"
#include "ops/simcore/instruments.hpp"
#include "ops/simcore/simulator.hpp"
#include "support/random_nets.hpp"
#include "support/sim_fixtures.hpp"

using namespace ops;
using namespace ops::simcore;
using ops::testing::add_goal;
using ops::testing::basic_config;
using ops::testing::empty_net;
using ops::testing::make_task;

namespace {

std::size_t count_code(const SimTrace& t, std::string_view code) {
  return static_cast<std::size_t>(
      std::count_if(t.evrs.begin(), t.evrs.end(), [&](const Evr& e) { return e.code == code; }));
}

double value_at(const Channel& c, double t) {
  for (const auto& s : c)
    if (s.t == t) return s.v;
  FAIL("no sample at t=" << t);
  return NAN;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ops_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config validation") {
  auto cfg = basic_config();
  cfg.variable.insert("power.supply_w");
  ScenarioSample s;
  CHECK_THROWS_AS(resolve(cfg, s), ConfigError);  // missing variable
  s.values["power.supply_w"] = 10.0;
  CHECK(resolve(cfg, s).get("power.supply_w") == 10.0);
  s.values["no.such.path"] = 1.0;
  CHECK_THROWS_AS(resolve(cfg, s), ConfigError);

  auto zero = basic_config(0.0);
  CHECK_THROWS_AS(run(empty_net(), zero, {}), HorizonError);

  ScenarioSample bad_task;
  bad_task.values["task.ghost.duration_scale"] = 2.0;
  CHECK_THROWS_AS(run(empty_net(), basic_config(), bad_task), ConfigError);

  auto with_plume = basic_config();
  ops::testing::add_plume(with_plume);
  CHECK(is_known_path(with_plume, "plume.p1.onset_s"));
  CHECK_FALSE(is_known_path(with_plume, "plume.p2.onset_s"));
  CHECK(is_known_path(with_plume, "detector.plume.p_fn"));
  CHECK_FALSE(is_known_path(with_plume, "detector.storm.p_fn"));

  const auto round = config_from_json(to_json(with_plume));
  CHECK(to_json(round) == to_json(with_plume));
  Json wrong = to_json(with_plume);
  wrong["schema"] = "simconfig/9";
  CHECK_THROWS(config_from_json(wrong));
}

TEST_CASE("empty net produces only background channels") {
  auto trace = run(empty_net(), basic_config(100.0), {});
  CHECK(trace.products.empty());
  CHECK(trace.task_outcomes.empty());
  for (const char* name : {channel::kBattery, channel::kStorage, channel::kTemperature, channel::kMagField,
                           channel::kPowerLoad})
    CHECK(trace.channels.count(name) == 1);
  CHECK(trace.channels.at(channel::kBattery).size() == 11);  // 0,10,...,100
}

TEST_CASE("one 60 s, 30 W task drains 0.5 Wh") {
  auto net = empty_net();
  add_goal(net, "g", 1, {make_task("img", "", 60.0, 30.0, tasknet::InstrumentId::NAC)});
  auto cfg = basic_config(200.0);
  cfg.instruments[1].power_w = 30.0;
  auto trace = run(net, cfg, {});
  const auto& b = trace.channels.at(channel::kBattery);
  CHECK(value_at(b, 0.0) - value_at(b, 60.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(value_at(b, 60.0) == value_at(b, 200.0));
  CHECK(trace.task_outcomes.at("img") == TaskOutcome::Executed);
  CHECK(trace.goal_outcomes.at("g") == GoalOutcome::Executed);
}

TEST_CASE("identical inputs give identical traces") {
  auto cfg = basic_config(900.0);
  ops::testing::add_plume(cfg, 0.05, 0.1);
  cfg.parameters["mag.volatility_nT"] = 0.5;
  cfg.parameters["reconnection.rate_per_s"] = 0.01;
  cfg.parameters["plume.p1.present"] = 1.0;
  ScenarioSample s;
  s.seed = 99;
  const auto net = ops::testing::plume_net();
  const auto a = run(net, cfg, s);
  const auto b = run(net, cfg, s);
  CHECK(a.trace_hash == b.trace_hash);
  CHECK(a == b);
  CHECK(a.trace_hash == compute_trace_hash(a));
  s.seed = 100;
  CHECK(run(net, cfg, s).trace_hash != a.trace_hash);
}

TEST_CASE("trace files round-trip") {
  auto cfg = basic_config(300.0);
  cfg.parameters["mag.volatility_nT"] = 0.3;
  auto trace = run(ops::testing::plume_net(), cfg, {7, {}, "b", 0});
  const auto dir = temp_dir("trace");
  write_trace(trace, dir);
  const auto back = read_trace(dir);
  CHECK(back == trace);
  CHECK(compute_trace_hash(back) == trace.trace_hash);
  CHECK(trace_from_json(to_json(trace)) == trace);
  std::filesystem::remove_all(dir);
}

TEST_CASE("simulation invariants over random networks") {
  Rng rng(404);
  for (int trial = 0; trial < 25; ++trial) {
    auto net = ops::testing::random_net(rng, 1 + static_cast<int>(rng.below(5)), 3);
    for (auto& [id, task] : net.tasks) {
      task.duration_s = 20.0 + 200.0 * rng.uniform();
      task.power_w = 40.0 * rng.uniform();
      task.data_rate_mbit_s = rng.uniform();
      task.instrument = rng.bernoulli(0.7) ? std::optional(tasknet::InstrumentId::WAC) : std::nullopt;
      task.activity = tasknet::ActivityKind::MapSwath;
    }
    if (!tasknet::validate(net).empty()) continue;
    auto cfg = basic_config(600.0);
    cfg.channel_period_s = 1.0;
    cfg.storage_capacity_mbit = 200.0 * rng.uniform() + 10.0;
    cfg.parameters["power.supply_w"] = 20.0;
    cfg.parameters["power.bus_load_w"] = 10.0;
    cfg.parameters["battery.initial_wh"] = 20.0 + 60.0 * rng.uniform();
    const auto trace = run(net, cfg, {rng.next_u64(), {}, "", 0});

    // Energy: each step's battery change equals (supply - load) dt unless clamped.
    const auto& b = trace.channels.at(channel::kBattery);
    const auto& load = trace.channels.at(channel::kPowerLoad);
    for (std::size_t k = 0; k + 1 < b.size(); ++k) {
      const double expected = b[k].v + (20.0 - load[k].v) / 3600.0;
      if (expected > 0.0 && expected < cfg.battery_capacity_wh) CHECK(std::abs(b[k + 1].v - expected) < 1e-9);
    }
    // Storage stays in bounds and equals the sum of product sizes (no downlinks).
    double total = 0.0;
    for (const auto& p : trace.products) total += p.size_mbit;
    const auto& st = trace.channels.at(channel::kStorage);
    for (const auto& s : st) {
      CHECK(s.v >= 0.0);
      CHECK(s.v <= cfg.storage_capacity_mbit + 1e-9);
    }
    CHECK(st.back().v + (trace.products.empty() ? 0.0 : trace.products.back().size_mbit) ==
          doctest::Approx(total).epsilon(1e-9));
    for (const auto& [name, c] : trace.channels)
      for (std::size_t k = 1; k < c.size(); ++k) CHECK(c[k].t > c[k - 1].t);
    for (const auto& e : trace.evrs) {
      CHECK(e.level != EvrLevel::ERROR);
      CHECK(e.t >= 0.0);
      CHECK(e.t <= cfg.horizon_s);
    }
    CHECK(trace.decisions.front().cycle == 0);
  }
}

TEST_CASE("plume detection activates and executes the conditional goal") {
  auto cfg = basic_config(900.0);
  ops::testing::add_plume(cfg);
  cfg.variable.insert("plume.p1.present");
  const auto net = ops::testing::plume_net();

  ScenarioSample yes{1, {{"plume.p1.present", 1.0}}, "", 0};
  const auto t1 = run(net, cfg, yes);
  CHECK(count_code(t1, evr::kPlumeDetected) == 1);
  CHECK(t1.goal_outcomes.at("plume_watch") == GoalOutcome::Executed);
  CHECK(t1.goal_outcomes.at("mapping") == GoalOutcome::Executed);
  REQUIRE(t1.decisions.size() >= 2);
  CHECK(t1.decisions[1].trigger.kind == onboard::TriggerKind::EventDetected);
  CHECK(t1.decisions[1].verdict_for("plume_watch")->verdict == onboard::Verdict::Scheduled);

  ScenarioSample no{1, {{"plume.p1.present", 0.0}}, "", 0};
  const auto t0 = run(net, cfg, no);
  CHECK(count_code(t0, evr::kPlumeDetected) == 0);
  CHECK(t0.goal_outcomes.at("plume_watch") == GoalOutcome::Inactive);
}

TEST_CASE("camera reset interrupts the running swath and replans") {
  auto cfg = basic_config(1200.0);
  cfg.parameters["fault.camera_reset.t_s"] = 100.0;
  auto net = empty_net("m");
  for (int i = 1; i <= 3; ++i) {
    auto& g = add_goal(net, "swath" + std::to_string(i), 40 - 10 * i,
                       {make_task("map" + std::to_string(i), "", 300.0, 10.0, tasknet::InstrumentId::WAC,
                                  tasknet::ActivityKind::MapSwath)});
    g.time_window = tasknet::TimeWindow{0.0, 1000.0};
  }
  const auto trace = run(net, cfg, {});
  CHECK(count_code(trace, evr::kCameraReset) == 1);
  CHECK(count_code(trace, evr::kCameraRecovered) == 1);
  CHECK(count_code(trace, evr::kTaskInterrupted) == 1);
  const auto& reset = *std::find_if(trace.evrs.begin(), trace.evrs.end(),
                                    [](const Evr& e) { return e.code == evr::kCameraReset; });
  CHECK(reset.level == EvrLevel::ERROR);
  CHECK(reset.t == 100.0);
  REQUIRE(trace.decisions.size() == 2);
  CHECK(trace.decisions[1].trigger.kind == onboard::TriggerKind::FaultDetected);
  // Recovery at 220 leaves 780 s of window: two of the three swaths fit.
  CHECK(trace.goal_outcomes.at("swath1") == GoalOutcome::Executed);
  CHECK(trace.goal_outcomes.at("swath2") == GoalOutcome::Executed);
  CHECK(trace.goal_outcomes.at("swath3") == GoalOutcome::Skipped);
}

TEST_CASE("overrun and power FDIR") {
  auto net = empty_net();
  add_goal(net, "a", 2, {make_task("ta", "", 100.0, 10.0, tasknet::InstrumentId::WAC)});
  add_goal(net, "b", 1, {make_task("tb", "", 100.0, 10.0, tasknet::InstrumentId::WAC)});
  auto cfg = basic_config(600.0);
  ScenarioSample slow{3, {{"task.ta.duration_scale", 1.5}}, "", 0};
  auto t = run(net, cfg, slow);
  CHECK(count_code(t, evr::kTaskOverrun) == 1);
  REQUIRE(t.decisions.size() == 2);
  CHECK(t.decisions[1].trigger.kind == onboard::TriggerKind::TaskOverrun);
  CHECK(t.goal_outcomes.at("b") == GoalOutcome::Executed);

  auto hungry = basic_config(600.0);
  hungry.parameters["battery.initial_wh"] = 6.0;
  ScenarioSample big{3, {{"task.ta.power_scale", 100.0}}, "", 0};
  auto p = run(net, hungry, big);
  CHECK(count_code(p, evr::kPowerFdir) >= 1);
  CHECK(p.task_outcomes.at("ta") == TaskOutcome::Interrupted);
}

TEST_CASE("exposure tuning during a targeted image") {
  auto net = empty_net();
  auto task = make_task("img", "", 60.0, 10.0, tasknet::InstrumentId::NAC);
  task.parameters = {{"autotune", 1.0}, {"target_noise", 0.02}, {"downlink_budget_mbit", 1000.0}};
  add_goal(net, "g", 1, {task});
  auto trace = run(net, basic_config(200.0), {});
  CHECK(count_code(trace, evr::kExposureTuned) == 1);
  REQUIRE(trace.products.size() == 2);
  CHECK(trace.products[0].size_mbit == doctest::Approx(4 * 8.0));  // noise 0.04 -> 0.02 needs 4 frames
}

TEST_CASE("mag mode switches under strong activity") {
  auto cfg = basic_config(1200.0);
  cfg.mag_threshold_nT2 = 1.0;
  cfg.parameters["mag.volatility_nT"] = 1.0;
  cfg.parameters["mag.reversion_per_s"] = 0.05;  // stationary variance 10 nT^2
  auto trace = run(empty_net(), cfg, {5, {}, "", 0});
  CHECK(count_code(trace, evr::kMagModeChanged) >= 1);
  CHECK(trace.channels.at(channel::kMagMode).back().v == 1.0);
}

TEST_CASE("environment processes") {
  EnvironmentState env;
  env.mag = {50.0, 0.1, 0.0};
  env.mag_field_nT = 50.0;
  EnvironmentStreams streams(1);
  CHECK(step_environment(env, 1.0, streams).mag_field_nT == 50.0);

  Plume p{"p", 0, 0, true, 100.0, 50.0, false};
  CHECK(plume_exists(p, 120.0));
  CHECK_FALSE(plume_exists(p, 151.0));
  CHECK_FALSE(plume_exists(p, 99.0));

  // Reconnection arrivals: lambda = 0.01/s over 10,000 s, averaged over 1,000 seeds.
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    EnvironmentState e;
    e.reconnection_rate_per_s = 0.01;
    EnvironmentStreams s(seed);
    for (int k = 0; k < 10000; ++k) e = step_environment(e, 1.0, s);
    total += static_cast<double>(e.reconnection_count);
  }
  CHECK(std::abs(total / 1000.0 - 100.0) <= 3.0 * std::sqrt(100.0) / std::sqrt(1000.0));
}

TEST_CASE("camera_observe") {
  Instrument nac{tasknet::InstrumentId::NAC, 30.0, 6.0, 2.0, 0.08};
  SpacecraftState st;
  st.instrument_modes[tasknet::InstrumentId::NAC] = InstrumentMode::On;
  auto o1 = camera_observe(nac, st, {1.0, 1.0}, 100.0);
  CHECK(o1.noise_level == 0.08);
  CHECK(o1.product.size_mbit == 6.0);
  auto o4 = camera_observe(nac, st, {1.0, 4.0}, 100.0);
  CHECK(o4.noise_level == doctest::Approx(0.04));
  CHECK(st.storage_mbit == 30.0);

  SpacecraftState full = st;
  full.storage_mbit = 90.0;
  Instrument big = nac;
  big.data_per_obs_mbit = 12.0;
  CHECK_THROWS_AS(camera_observe(big, full, {1.0, 1.0}, 100.0), StorageFull);
  CHECK(full.storage_mbit == 90.0);

  full.faults.insert(FaultFlag::CameraFault);
  CHECK_THROWS_AS(camera_observe(nac, full, {1.0, 1.0}, 100.0), InstrumentFaulted);
}

TEST_CASE("observation windows") {
  const double R = kTritonRadiusKm;
  // Straight line passing 1000 km above the sub-target point at 5 km/s.
  std::vector<EphemerisRow> rows;
  const double v = 5.0, tc = 1000.0;
  for (double t = 0; t <= 2000; t += 50)
    rows.push_back({t, {R + 1000.0, v * (t - tc), 0.0}, {0, 0, 0}, {354759.0, 0, 0}});
  const Ephemeris eph(rows);

  auto all = observation_windows(eph, 0.0, 0.0, {});
  REQUIRE(all.size() == 1);
  CHECK(all[0].first == 0.0);
  CHECK(all[0].second == 2000.0);

  CHECK(observation_windows(eph, 0.0, 180.0, {1e12, 0.0}).empty());  // far side

  // |r(t)| = 2000 -> (t - tc) = ±sqrt(2000^2 - 1000^2) / v
  auto w = observation_windows(eph, 0.0, 0.0, {2000.0, -90.0});
  REQUIRE(w.size() == 1);
  const double half = std::sqrt(2000.0 * 2000.0 - 1000.0 * 1000.0) / v;
  CHECK(std::abs(w[0].first - (tc - half)) < 1.0);
  CHECK(std::abs(w[0].second - (tc + half)) < 1.0);
}

TEST_CASE("ephemeris table and hyperbolic flyby") {
  auto eph = hyperbolic_flyby(2000.0, 8.0, 600.0, 0.0, 1200.0, 10.0);
  double rmin = 1e18;
  for (const auto& r : eph.rows()) rmin = std::min(rmin, std::hypot(r.spacecraft[0], r.spacecraft[1]));
  CHECK(rmin == doctest::Approx(2000.0).epsilon(1e-9));
  // Vis-viva on the sampled rows: v^2/2 - mu/r with v from central differences.
  const auto& rows = eph.rows();
  auto energy = [&](std::size_t k) {
    const auto& p = rows[k].spacecraft;
    const double vx = (rows[k + 1].spacecraft[0] - rows[k - 1].spacecraft[0]) / 20.0;
    const double vy = (rows[k + 1].spacecraft[1] - rows[k - 1].spacecraft[1]) / 20.0;
    return 0.5 * (vx * vx + vy * vy) - kTritonGm / std::hypot(p[0], p[1]);
  };
  CHECK(energy(5) == doctest::Approx(0.5 * 8.0 * 8.0).epsilon(1e-3));
  CHECK(energy(rows.size() - 6) == doctest::Approx(0.5 * 8.0 * 8.0).epsilon(1e-3));
  const auto reparsed = Ephemeris::parse_csv(eph.to_csv());
  REQUIRE(reparsed.rows().size() == eph.rows().size());
  CHECK(reparsed.rows()[7].spacecraft == eph.rows()[7].spacecraft);
  CHECK_THROWS(Ephemeris::parse_csv("t_s,sc_x\n0,1\n"));
  CHECK_THROWS(Ephemeris::parse_csv(eph.to_csv().substr(0, 60)));
  const auto mid = eph.at(5.0);
  CHECK(mid.spacecraft[0] == doctest::Approx(0.5 * (eph.rows()[0].spacecraft[0] + eph.rows()[1].spacecraft[0])));
}

TEST_CASE("EVR registry file matches the code table") {
  const Json reg = read_json_file(std::filesystem::path(OPS_SOURCE_DIR) / "registry" / "evr_codes.json");
  REQUIRE(reg["codes"].size() == evr::kRegistry.size());
  for (std::size_t i = 0; i < evr::kRegistry.size(); ++i) {
    CHECK(reg["codes"][i]["code"] == std::string(evr::kRegistry[i].code));
    CHECK(parse_evr_level(reg["codes"][i]["level"].get<std::string>()) == evr::kRegistry[i].level);
  }
}

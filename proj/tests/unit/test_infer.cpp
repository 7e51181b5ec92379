#include <doctest.h>

#include <chrono>
#include <cmath>
#include <map>

#include "ops/infer/explain.hpp"
#include "ops/infer/report.hpp"
#include "support/infer_fixtures.hpp"

using namespace ops;
using namespace ops::infer;

namespace {

const std::vector<std::vector<double>> kSticky{{0.9, 0.1}, {0.2, 0.8}};

Telemetry detections(const std::vector<int>& fired, double bin_s = 30.0) {
  simcore::Channel c;
  for (std::size_t k = 0; k < fired.size(); ++k)
    if (fired[k] >= 0) c.push_back({static_cast<double>(k) * bin_s, static_cast<double>(fired[k])});
  return {{"detector.plume", c}};
}

// Per-bin detection likelihoods for the forward-backward oracle.
std::vector<std::vector<double>> rate_likelihoods(const std::vector<int>& fired, double p_fp, double p_fn) {
  std::vector<std::vector<double>> lik;
  for (int f : fired) {
    if (f < 0)
      lik.push_back({1.0, 1.0});
    else
      lik.push_back({f ? p_fp : 1.0 - p_fp, f ? 1.0 - p_fn : p_fn});
  }
  return lik;
}

// Ranking matches the oracle up to permutations inside near-ties.
void check_ranking(const std::vector<Hypothesis>& hyps, const testing::DetachCase& c) {
  const auto ref = oracle::brute_force_detach(c.n, c.fixed, c.detachable, c.penalty);
  REQUIRE(hyps.size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(hyps[i].accumulated_error == doctest::Approx(ref[i].error).epsilon(1e-9));
    const bool tied = (i > 0 && ref[i].error - ref[i - 1].error < 1e-9) ||
                      (i + 1 < ref.size() && ref[i + 1].error - ref[i].error < 1e-9);
    if (!tied) CHECK(testing::detach_vector(hyps[i], c) == ref[i].detached);
  }
}

}  // namespace

TEST_CASE("single prior") {
  FactorGraph g;
  g.add_variable({"x", "x"});
  g.add(PriorFactor{0, 3.0, 1.0});
  const Hypothesis h = solve(g, unassigned_modes(g));
  CHECK(h.x[0] == doctest::Approx(3.0));
  CHECK(h.sigma[0] == doctest::Approx(1.0));
  CHECK(h.converged);
}

TEST_CASE("two priors give the precision-weighted mean") {
  FactorGraph g;
  g.add_variable({"x", "x"});
  g.add(PriorFactor{0, 0.0, 1.0});
  g.add(PriorFactor{0, 2.0, 1.0});
  const Hypothesis h = solve(g, unassigned_modes(g));
  CHECK(h.x[0] == doctest::Approx(1.0));
  CHECK(h.sigma[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(h.accumulated_error == doctest::Approx(1.0));
}

TEST_CASE("linear chains match the RTS smoother") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const double a = seed % 2 ? 1.0 : 0.9, b = seed % 2 ? 0.0 : 0.4;
    const auto c = testing::linear_chain(20, seed, a, b);
    const Hypothesis h = solve(c.graph, unassigned_modes(c.graph));
    const auto ref = oracle::rts_smooth(c.chain);
    for (int k = 0; k < 20; ++k) {
      CHECK(std::abs(h.x[k] - ref[k].mean) < 1e-6);
      CHECK(std::abs(h.sigma[k] - std::sqrt(ref[k].var)) < 1e-6);
    }
  }
}

TEST_CASE("chain without a unary factor is singular") {
  FactorGraph g;
  g.add_variable({"x@0", "x", VarKind::Continuous, 2, 0});
  g.add_variable({"x@1", "x", VarKind::Continuous, 2, 1});
  g.add(ProcessFactor{0, 1, -1, 1.0, 0.0, 0.0, 1.0});
  CHECK_THROWS_AS(solve(g, unassigned_modes(g)), SingularSystem);
  g.add_variable({"y", "y"});
  g.add(PriorFactor{2, 0.0, 1.0});
  g.add(MeasurementFactor{1, 0.0, 1.0});
  CHECK_NOTHROW(solve(g, unassigned_modes(g)));
}

TEST_CASE("iteration cap returns the best iterate unconverged") {
  FactorGraph g;
  g.add_variable({"tau", "tau"});
  g.add(PriorFactor{0, 5.0, 3.0});
  g.add_variable({"d", "d", VarKind::Discrete, 2});
  MultiAssociationFactor f{1, {}};
  for (int v = 0; v < 2; ++v) f.modes.push_back({0.0, {{0, true, 0.0, 1.0}}});
  g.add(f);
  Modes m = unassigned_modes(g);
  m.discrete[1] = 0;
  SolverOptions opt;
  opt.max_iterations = 1;
  const Hypothesis h = solve(g, m, opt);
  CHECK_FALSE(h.converged);
  CHECK(h.accumulated_error <= total_error(g, m, {5.0, 0.0}));
  opt.max_iterations = 100;
  CHECK(solve(g, m, opt).converged);
}

TEST_CASE("detection residual Jacobian matches central differences") {
  Rng rng(7, "jacobian");
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    DetectionResidual r{0, rng.bernoulli(0.5), rng.normal(0.0, 2.0), 0.3 + 2.0 * rng.uniform_open()};
    const double tau = r.mu + r.s * (12.0 * rng.uniform_open() - 6.0);
    const double h = 1e-5 * r.s;
    const double numeric = (r.value(tau + h) - r.value(tau - h)) / (2.0 * h);
    const double analytic = r.derivative(tau);
    CHECK(std::abs(analytic - numeric) <= 1e-6 * std::max(std::abs(analytic), std::abs(numeric)));
    const double p = detect_probability(r.detected, tau, r.mu, r.s);
    CHECK(0.5 * r.value(tau) * r.value(tau) == doctest::Approx(-std::log(p)).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("no multi-modal factors gives one hypothesis") {
  const auto c = testing::linear_chain(5, 3);
  CHECK(enumerate_hypotheses(c.graph).size() == 1);
}

TEST_CASE("corrupted measurement is detached, clean data stays attached") {
  const auto bad = testing::detach_case(5, 42, 2);
  auto hyps = enumerate_hypotheses(bad.graph, kUnboundedBeam);
  CHECK(testing::detach_vector(hyps.front(), bad) == std::vector<int>{0, 0, 1, 0, 0});
  CHECK(hyps.front().detached(bad.graph) == std::vector<std::size_t>{bad.detachable_factors[2]});
  check_ranking(hyps, bad);

  const auto clean = testing::detach_case(5, 42);
  hyps = enumerate_hypotheses(clean.graph, kUnboundedBeam);
  CHECK(testing::detach_vector(hyps.front(), clean) == std::vector<int>(5, 0));
  check_ranking(hyps, clean);
}

TEST_CASE("hypothesis ranking equals brute force for up to 8 detachable factors") {
  for (int k = 1; k <= 8; ++k)
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto c = testing::detach_case(k, 100 * k + seed, static_cast<int>(seed) % k, 4.0 + seed, 3.0);
      check_ranking(enumerate_hypotheses(c.graph, kUnboundedBeam), c);
    }
}

TEST_CASE("serial and parallel enumeration agree") {
  const auto c = testing::detach_case(7, 5, 3);
  const auto a = enumerate_hypotheses(c.graph, kUnboundedBeam, false);
  const auto b = enumerate_hypotheses(c.graph, kUnboundedBeam, true);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].modes.factor == b[i].modes.factor);
    CHECK(a[i].accumulated_error == b[i].accumulated_error);
  }
}

TEST_CASE("beam search finds the corrupted measurement beyond the exhaustive limit") {
  const auto c = testing::detach_case(12, 9, 7);  // 4096 assignments
  const auto hyps = enumerate_hypotheses(c.graph, 32);
  CHECK(hyps.size() <= 32);
  std::vector<int> want(12, 0);
  want[7] = 1;
  CHECK(testing::detach_vector(hyps.front(), c) == want);
  for (std::size_t i = 1; i < hyps.size(); ++i) CHECK(hyps[i - 1].accumulated_error <= hyps[i].accumulated_error);
}

TEST_CASE("detach decision is monotone in the deviation") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    bool detached = false;
    for (double dev = 0.0; dev <= 20.0; dev += 0.25) {
      const auto c = testing::detach_case(4, seed, 1, dev);
      const auto hyps = enumerate_hypotheses(c.graph, kUnboundedBeam);
      const bool now = hyps.front().modes.factor[c.detachable_factors[1]] == 1;
      CHECK_FALSE((detached && !now));
      detached = detached || now;
    }
    CHECK(detached);
  }
}

TEST_CASE("build_graph counts") {
  Json sem = {{"schema", "sem/1"},
              {"bin_s", 10.0},
              {"variables", {{{"name", "mag_field_nT"}, {"prior", {{"mean", 8.0}, {"sigma", 5.0}}}}}},
              {"effects",
               {{{"cause", "mag_field_nT"},
                 {"effect", "mag_field_nT"},
                 {"template", {{"type", "mean_reverting"}, {"theta", 0.02}, {"mu", 8.0}, {"sigma", 1.0}}}}}},
              {"channels", {{{"channel", "mag_field_nT"}, {"variable", "mag_field_nT"}, {"sigma", 0.5}, {"detachable", true}}}}};
  const auto m = sem_from_json(sem);
  auto count = [](const FactorGraph& g, std::size_t kind) {
    return std::count_if(g.factors.begin(), g.factors.end(), [&](const Factor& f) { return f.body.index() == kind; });
  };
  FactorGraph g = build_graph(m, {}, 3);
  CHECK(g.variables.size() == 3);
  CHECK(count(g, 1) == 2);
  CHECK(count(g, 2) + count(g, 3) == 0);

  simcore::Channel mag;
  for (int i = 0; i < 5; ++i) mag.push_back({4.0 * i, 8.0 + i});
  g = build_graph(m, {{"mag_field_nT", mag}}, 3);
  CHECK(count(g, 3) == 5);
  CHECK(g.variables[0].initial == doctest::Approx(8.5));  // samples at t=0 and t=4

  CHECK_THROWS_AS(build_graph(m, {{"battery_wh", {}}}, 3), ModelError);
  CHECK_THROWS_AS(build_graph(m, {{"mag_field_nT", {{100.0, 1.0}}}}, 3), ModelError);

  const auto plume = testing::plume_model(0.3, kSticky, 0.1, 0.2);
  g = build_graph(plume, detections({-1, 1, -1, -1}), 4);
  CHECK(count(g, 4) == 1);
  CHECK(count(g, 5) == 3);
  CHECK(count(g, 6) == 1);
}

TEST_CASE("energy balance rollout initializes unmeasured bins") {
  Json sem = {{"schema", "sem/1"},
              {"bin_s", 360.0},
              {"variables",
               {{{"name", "battery_wh"}, {"prior", {{"mean", 100.0}, {"sigma", 1.0}}}},
                {{"name", "power_load_w"}, {"prior", {{"mean", 30.0}, {"sigma", 1.0}}}}}},
              {"effects",
               {{{"cause", "power_load_w"}, {"effect", "battery_wh"}, {"template", {{"type", "energy_balance"}, {"supply_w", 40.0}, {"sigma", 0.1}}}},
                {{"cause", "power_load_w"}, {"effect", "power_load_w"}, {"template", {{"type", "random_walk"}, {"sigma", 0.5}}}}}}};
  const auto g = build_graph(sem_from_json(sem), {}, 3);
  CHECK(g.var("battery_wh@1").initial == doctest::Approx(101.0));
  CHECK(g.var("battery_wh@2").initial == doctest::Approx(102.0));
  const Hypothesis h = solve(g, unassigned_modes(g));
  CHECK(h.x[g.find("battery_wh@2")] == doctest::Approx(102.0));
}

TEST_CASE("model validation") {
  Json bad = {{"schema", "sem/1"},
              {"variables", {{{"name", "x"}}}},
              {"effects", {{{"cause", "y"}, {"effect", "x"}, {"template", {{"type", "energy_balance"}}}}}}};
  CHECK_THROWS_AS(sem_from_json(bad), ModelError);
  bad["effects"][0]["cause"] = "x";
  bad["effects"][0]["template"]["type"] = "random_walk";
  bad["effects"][0]["template"]["sigma"] = 0.0;
  CHECK_THROWS_AS(sem_from_json(bad), ModelError);
  CHECK_THROWS_AS(sem_from_json(Json{{"schema", "sem/2"}}), DocumentError);
  const auto m = testing::plume_model(0.3, kSticky, 0.1, 0.2);
  CHECK(sem_from_json(to_json(m)).referenced_channels() == m.referenced_channels());
  Json gem = {{"schema", "gem/1"}, {"rules", {{{"id", "r"}, {"goal", "g"}, {"conditions", {{{"variable", "battery_wh"}, {"op", ">="}, {"value", 1}}}}, {"if_true", "Scheduled"}}}}};
  CHECK_THROWS_AS(check_against(gem_from_json(gem), m), ModelError);
}

TEST_CASE("discrete posterior special cases") {
  auto post = [](double p_fp, double p_fn, double prior) {
    const auto m = testing::plume_model(prior, kSticky, p_fp, p_fn);
    const auto g = build_graph(m, detections({1}), 1);
    return discrete_posterior(g, enumerate_hypotheses(g, kUnboundedBeam)).at("plume_exists@0");
  };
  CHECK(post(0.0, 0.0, 0.3)[1] == 1.0);
  CHECK(post(0.5, 0.5, 0.5)[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("discrete posterior matches forward-backward") {
  const double p_fp = 0.1, p_fn = 0.2, prior = 0.3;
  const auto m = testing::plume_model(prior, kSticky, p_fp, p_fn);
  Rng rng(5, "hmm");
  for (int n = 1; n <= 10; ++n)
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<int> fired;
      for (int k = 0; k < n; ++k) fired.push_back(static_cast<int>(rng.below(3)) - 1);
      if (n == 3 && trial == 0) fired = {1, 0, 1};
      const auto g = build_graph(m, detections(fired), n);
      const auto post = discrete_posterior(g, enumerate_hypotheses(g, kUnboundedBeam));
      const auto ref = oracle::forward_backward({1.0 - prior, prior}, kSticky, rate_likelihoods(fired, p_fp, p_fn));
      for (int k = 0; k < n; ++k) {
        const auto& row = post.at("plume_exists@" + std::to_string(k));
        CHECK(std::abs(row[1] - ref[k][1]) < 1e-9);
        CHECK(std::abs(row[0] + row[1] - 1.0) < 1e-12);
      }
    }
}

namespace {

StateEffectModel battery_model() {
  Json sem = {{"schema", "sem/1"},
              {"bin_s", 60.0},
              {"variables", {{{"name", "battery_wh"}, {"prior", {{"mean", 40.0}, {"sigma", 20.0}}}}}},
              {"effects", {{{"cause", "battery_wh"}, {"effect", "battery_wh"}, {"template", {{"type", "random_walk"}, {"sigma", 1.0}}}}}},
              {"channels", {{{"channel", "battery_wh"}, {"variable", "battery_wh"}, {"sigma", 0.5}}}}};
  return sem_from_json(sem);
}

GoalElaborationModel battery_rules() {
  Json gem = {{"schema", "gem/1"},
              {"rules",
               {{{"id", "limb_needs_power"},
                 {"goal", "g_limb"},
                 {"conditions", {{{"variable", "battery_wh"}, {"op", ">="}, {"value", 20.0}}}},
                 {"actions", {"map_limb"}},
                 {"if_true", {"Scheduled"}},
                 {"if_false", {"SkippedResource"}}}}}};
  return gem_from_json(gem);
}

onboard::DecisionRecord record(double t, const std::string& goal, onboard::Verdict v) {
  onboard::DecisionRecord r;
  r.t = t;
  r.considered_goals.push_back({goal, 1, v});
  return r;
}

}  // namespace

TEST_CASE("explanation cites the rule and inferred state") {
  const auto m = battery_model();
  // Battery sampled at t=0 and t=300; the decision at t=180 falls in an unmeasured bin.
  const auto inf = run_inference(m, {{"battery_wh", {{0.0, 30.0}, {300.0, 10.0}}}}, 6);
  const int v3 = inf.graph.find("battery_wh@3");
  CHECK(inf.top().x[v3] == doctest::Approx(18.0).epsilon(0.02));  // linear interpolation 30 -> 10
  CHECK(inf.top().sigma[v3] > 0.0);

  auto rep = explain_decision(record(180.0, "g_limb", onboard::Verdict::SkippedResource), inf, battery_rules());
  REQUIRE(rep.decisions.size() == 1);
  const auto& v = rep.decisions[0].verdicts.at(0);
  CHECK(v.rule == "limb_needs_power");
  CHECK_FALSE(v.rule_holds);
  CHECK(v.consistent);
  CHECK(v.checks.at(0).var_id == "battery_wh@3");
  CHECK(v.checks.at(0).condition.value == 20.0);
  CHECK(v.text.find("battery_wh@3") != std::string::npos);
  CHECK(v.text.find("20") != std::string::npos);
  CHECK(rep.anomalies.empty());

  rep = explain_decision(record(0.0, "g_limb", onboard::Verdict::Scheduled), inf, battery_rules());
  CHECK(rep.decisions[0].verdicts[0].rule_holds);
  CHECK(rep.anomalies.empty());

  rep = explain_decision(record(300.0, "g_limb", onboard::Verdict::Scheduled), inf, battery_rules());
  CHECK(rep.anomalies.size() == 1);
  CHECK_THROWS_AS(explain_decision(record(0.0, "g_other", onboard::Verdict::Scheduled), inf, battery_rules()),
                  ModelMismatch);
}

TEST_CASE("detection claim contradicted by a drifted threshold is an anomaly") {
  Json sem = {{"schema", "sem/1"},
              {"bin_s", 30.0},
              {"variables",
               {{{"name", "plume_exists"}, {"kind", "discrete"}, {"domain", 2}, {"prior", {0.98, 0.02}}},
                {{"name", "detector_threshold"}, {"per_timestep", false}, {"prior", {{"mean", 1.0}, {"sigma", 2.0}}}},
                {{"name", "detector.plume"}, {"kind", "signal"}}}},
              {"effects",
               {{{"cause", "plume_exists"}, {"effect", "plume_exists"}, {"template", {{"type", "transition"}, {"probs", {{0.99, 0.01}, {0.1, 0.9}}}}}},
                {{"cause", "plume_exists"},
                 {"effect", "detector.plume"},
                 {"template", {{"type", "detection"}, {"threshold", "detector_threshold"}, {"p_fp", 0.0005}, {"p_fn", 0.1}, {"nominal", 1.0}, {"s", 1.0}}}}}},
              {"commands", {{{"variable", "detector_threshold"}, {"value", 1.0}, {"sigma", 0.05}}}}};
  const auto m = sem_from_json(sem);
  std::vector<int> fired;
  for (int k = 0; k < 20; ++k) fired.push_back(k % 2);
  const auto inf = run_inference(m, detections(fired), 20);
  CHECK(inf.top().detached(inf.graph).size() == 1);
  CHECK(inf.posterior.at("plume_exists@1")[1] < 0.05);
  CHECK(inf.top().x[inf.graph.find("detector_threshold")] < 0.0);

  Json gem = {{"schema", "gem/1"},
              {"rules", {{{"id", "followup"}, {"goal", "g_plume"}, {"conditions", {{{"variable", "plume_exists"}, {"op", "=="}, {"value", 1}}}}, {"if_true", "Scheduled"}, {"if_false", "Inactive"}}}},
              {"triggers", {{{"event", "PlumeDetected"}, {"variable", "plume_exists"}, {"value", 1}}}}};
  auto rec = record(30.0, "g_plume", onboard::Verdict::Scheduled);
  rec.trigger = onboard::Trigger::detected(tasknet::EventKind::PlumeDetected);
  const auto rep = explain_decision(rec, inf, gem_from_json(gem));
  REQUIRE_FALSE(rep.anomalies.empty());
  CHECK(rep.anomalies[0].subject == "PlumeDetected");
  REQUIRE(rep.anomalies[0].detached.size() == 1);
  CHECK(rep.anomalies[0].detached[0].find("command detector_threshold") == 0);
  CHECK_FALSE(rep.decisions[0].trigger_check->consistent);
}

TEST_CASE("report round-trips through JSON") {
  const auto inf = run_inference(battery_model(), {{"battery_wh", {{0.0, 30.0}, {300.0, 14.0}}}}, 6);
  const auto rep = make_report(inf, explain_decision(record(300.0, "g_limb", onboard::Verdict::Scheduled), inf, battery_rules()));
  CHECK(rep.series.at("battery_wh").size() == 6);
  CHECK(rep.anomalies.size() == 1);
  const auto back = report_from_json(to_json(rep));
  CHECK(to_json(back) == to_json(rep));
  CHECK(back.estimate_at("battery_wh", 290.0)->ml == doctest::Approx(rep.series.at("battery_wh")[5].ml));
}

TEST_CASE("twenty-bin chain solves quickly") {
  const auto c = testing::linear_chain(20, 99);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 100; ++i) solve(c.graph, unassigned_modes(c.graph));
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(1));
}

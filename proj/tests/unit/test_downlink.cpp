#include <doctest.h>

#include <algorithm>
#include <mutex>

#include "ops/downlink/incon.hpp"
#include "ops/downlink/match.hpp"
#include "ops/infer/report.hpp"
#include "ops/predict/batch.hpp"
#include "ops/simcore/evr_codes.hpp"
#include "ops/simcore/simulator.hpp"
#include "support/infer_fixtures.hpp"
#include "support/sim_fixtures.hpp"

using namespace ops;
using namespace ops::downlink;

namespace {

simcore::SimTrace product_trace(const std::vector<std::pair<std::int64_t, double>>& products) {
  simcore::SimTrace t;
  t.net_id = "n";
  t.channels["battery_wh"] = {{0.0, 1.0}, {10.0, 2.0}, {20.0, 3.0}, {30.0, 4.0}};
  t.evrs.push_back({5.0, simcore::EvrLevel::INFO, "PLAN_UPDATED", {}});
  for (std::size_t i = 0; i < products.size(); ++i)
    t.products.push_back({"p" + std::to_string(products[i].first), "img", products[i].second, static_cast<double>(i), "",
                          products[i].first});
  return t;
}

std::vector<std::int64_t> priorities(const DownlinkTrace& d) {
  std::vector<std::int64_t> out;
  for (const auto& p : d.trace.products) out.push_back(p.priority);
  std::sort(out.rbegin(), out.rend());
  return out;
}

struct Batch {
  predict::BatchRequest request;
  predict::BatchResult result;
  std::map<std::size_t, simcore::SimTrace> traces;
};

Batch plume_batch(std::size_t n, double prior, std::uint64_t seed) {
  Batch b;
  b.request.net = testing::plume_net();
  b.request.config = testing::basic_config(900.0);
  testing::add_plume(b.request.config);
  b.request.spec = {{{"plume.p1.present", predict::Discrete{{{0.0, 1.0 - prior}, {1.0, prior}}}}}};
  b.request.n = n;
  b.request.master_seed = seed;
  std::mutex mu;
  b.result = predict::run_batch(b.request, 2, [&](std::size_t i, const simcore::SimTrace& t) {
    std::lock_guard lock(mu);
    b.traces[i] = t;
  });
  return b;
}

predict::ClusterSet without(const Batch& b, std::size_t held_out) {
  std::vector<predict::RunSummary> rest;
  for (const auto& s : b.result.summaries)
    if (s.index != held_out) rest.push_back(s);
  auto cs = predict::cluster(rest, b.request.dt_bin);
  cs.net_id = b.request.net.id;
  cs.net_revision = b.request.net.revision;
  return cs;
}

}  // namespace

TEST_CASE("decimation budget examples") {
  const auto t = product_trace({{1, 4.0}, {3, 4.0}, {2, 4.0}});
  CHECK(decimate(t, kUnlimitedBudget).trace.products.size() == 3);
  const auto none = decimate(t, 0.0);
  CHECK(none.trace.products.empty());
  CHECK(none.trace.evrs == t.evrs);
  CHECK(none.trace.channels == t.channels);
  CHECK(none.received_fraction.at("products") == 0.0);
  CHECK(priorities(decimate(t, 9.0)) == std::vector<std::int64_t>{3, 2});
}

TEST_CASE("larger budgets never drop products") {
  Rng rng(3, "decimate");
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::int64_t, double>> ps;
    for (int i = 0; i < 8; ++i) ps.push_back({static_cast<std::int64_t>(rng.below(5)), 0.5 + 5.0 * rng.uniform_open()});
    const auto t = product_trace(ps);
    std::set<std::string> prev;
    for (double budget = 0.0; budget <= 50.0; budget += 0.5) {
      std::set<std::string> now;
      for (const auto& p : decimate(t, budget).trace.products) now.insert(p.id);
      CHECK(std::includes(now.begin(), now.end(), prev.begin(), prev.end()));
      prev = std::move(now);
    }
  }
}

TEST_CASE("channels thin to the policy period") {
  DecimationPolicy pol;
  pol.channel_period_s["battery_wh"] = 20.0;
  const auto d = decimate(product_trace({}), 0.0, pol);
  const auto& c = d.trace.channels.at("battery_wh");
  REQUIRE(c.size() == 2);
  CHECK(c[0].t == 0.0);
  CHECK(c[1].t == 20.0);
  CHECK(d.received_fraction.at("channel.battery_wh") == 0.5);
  CHECK(downlink_from_json(to_json(d)) == d);
}

TEST_CASE("signature falls back to EVRs when the outcome product is cut") {
  const auto b = plume_batch(30, 0.5, 8);
  for (const auto& [i, t] : b.traces) {
    SignatureSource src;
    const auto full = full_downlink(t);
    CHECK(predict::signature_key(reconstruct_signature(full, b.request.net, &src)) ==
          predict::signature_key(predict::signature_of(t, b.request.net)));
    CHECK(src == SignatureSource::Products);
    const auto cut = decimate(t, 0.0);
    CHECK(cut.trace.goal_outcomes.empty());
    CHECK(predict::signature_key(reconstruct_signature(cut, b.request.net, &src)) ==
          predict::signature_key(predict::signature_of(t, b.request.net)));
    CHECK(src == SignatureSource::Evrs);
  }
}

TEST_CASE("held-out members match their own cluster") {
  const auto b = plume_batch(40, 0.5, 21);
  int trials = 0;
  for (std::size_t i = 0; i < 40; ++i) {
    const auto cs = without(b, i);
    const auto sig = predict::signature_key(predict::signature_of(b.traces.at(i), b.request.net));
    const auto own = std::find_if(cs.clusters.begin(), cs.clusters.end(),
                                  [&](const auto& c) { return predict::signature_key(c.signature) == sig; });
    if (own == cs.clusters.end()) continue;
    const auto m = match_cluster(full_downlink(b.traces.at(i)), cs, b.request.net);
    CHECK(m.best_cluster == static_cast<std::size_t>(own - cs.clusters.begin()));
    CHECK(m.signature_distance == 0);
    CHECK(evr_diff(full_downlink(b.traces.at(i)), *own).empty());
    ++trials;
  }
  CHECK(trials >= 38);
}

TEST_CASE("identical members give zero residual") {
  const auto b = plume_batch(5, 1.0, 2);
  const auto cs = b.result.clusters();
  REQUIRE(cs.clusters.size() == 1);
  const auto m = match_cluster(full_downlink(b.traces.at(0)), cs, b.request.net);
  CHECK(m.best_cluster == 0);
  CHECK(m.signature_distance == 0);
  CHECK(m.channel_residual == 0.0);
}

TEST_CASE("flipped goal outcome is at distance one or more from every cluster") {
  const auto b = plume_batch(30, 0.5, 4);
  const auto cs = b.result.clusters();
  auto actual = full_downlink(b.traces.at(0));
  actual.trace.goal_outcomes["mapping"] = simcore::GoalOutcome::Interrupted;
  const auto m = match_cluster(actual, cs, b.request.net);
  for (const auto& r : m.ranking) CHECK(r.signature_distance >= 1);
  for (std::size_t k = 1; k < m.ranking.size(); ++k) {
    const auto &a = m.ranking[k - 1], &c = m.ranking[k];
    CHECK((a.signature_distance < c.signature_distance ||
           (a.signature_distance == c.signature_distance && a.channel_residual <= c.channel_residual)));
  }
  actual.trace.net_revision += 1;
  CHECK_THROWS_AS(match_cluster(actual, cs, b.request.net), RevisionMismatch);
}

TEST_CASE("evr diff surfaces surplus and missing codes") {
  const auto b = plume_batch(20, 1.0, 6);
  const auto cs = b.result.clusters();
  REQUIRE(cs.clusters.size() == 1);
  const auto& c = cs.clusters[0];
  REQUIRE(c.evr_counts.at(std::string(simcore::evr::kPlumeDetected)).min >= 1);

  auto actual = full_downlink(b.traces.at(3));
  CHECK(evr_diff(actual, c).empty());
  actual.trace.evrs.push_back({400.0, simcore::EvrLevel::ERROR, std::string(simcore::evr::kCameraReset), {{"instrument", "WAC"}}});
  auto d = evr_diff(actual, c);
  CHECK(d.surplus_codes() == std::vector<std::string>{"CAMERA_RESET"});
  CHECK(d.surplus[0].evrs.size() == 1);

  std::erase_if(actual.trace.evrs, [](const auto& e) { return e.code == simcore::evr::kPlumeDetected; });
  d = evr_diff(actual, c);
  CHECK(d.missing_codes() == std::vector<std::string>{"PLUME_DETECTED"});
}

namespace {

infer::StateEffectModel two_channel_model(double meas_sigma) {
  Json sem = {{"schema", "sem/1"},
              {"bin_s", 60.0},
              {"variables",
               {{{"name", "battery_wh"}, {"prior", {{"mean", 50.0}, {"sigma", 10.0}}}},
                {{"name", "mag_field_nT"}, {"prior", {{"mean", 8.0}, {"sigma", 5.0}}}}}},
              {"effects",
               {{{"cause", "battery_wh"}, {"effect", "battery_wh"}, {"template", {{"type", "random_walk"}, {"sigma", 0.7}}}},
                {{"cause", "mag_field_nT"}, {"effect", "mag_field_nT"}, {"template", {{"type", "random_walk"}, {"sigma", 1.0}}}}}},
              {"channels",
               {{{"channel", "battery_wh"}, {"variable", "battery_wh"}, {"sigma", meas_sigma}},
                {{"channel", "mag_field_nT"}, {"variable", "mag_field_nT"}, {"sigma", meas_sigma}}}}};
  return infer::sem_from_json(sem);
}

}  // namespace

TEST_CASE("incon from a fully measured state equals the last samples") {
  DownlinkTrace d;
  for (int k = 0; k < 5; ++k) {
    d.trace.channels["battery_wh"].push_back({60.0 * k, 50.0 - k});
    d.trace.channels["mag_field_nT"].push_back({60.0 * k, 8.0 + 0.5 * k});
  }
  const auto m = two_channel_model(1e-4);
  const auto inf = infer::run_inference(m, infer::extract_telemetry(m, d.trace), 5);
  const auto inc = build_incon(d, infer::make_report(inf));
  CHECK(inc.t_epoch == 240.0);
  CHECK(inc.state.at("battery_wh").ml == doctest::Approx(46.0).epsilon(1e-6));
  CHECK(inc.state.at("mag_field_nT").ml == doctest::Approx(10.0).epsilon(1e-6));
  for (const auto& [_, e] : inc.state) CHECK(*e.sigma > 0.0);
}

TEST_CASE("incon for an unmeasured battery matches the smoother") {
  DownlinkTrace d;
  d.trace.channels["battery_wh"] = {{0.0, 52.0}, {120.0, 49.0}};
  d.trace.channels["mag_field_nT"] = {{0.0, 8.0}, {120.0, 9.0}, {300.0, 7.5}};
  const double r = 0.5;
  const auto m = two_channel_model(r);
  const auto inf = infer::run_inference(m, infer::extract_telemetry(m, d.trace), 6);
  auto rep = infer::make_report(inf);
  rep.anomalies.push_back({100.0, "g", "injected", {}});
  const auto inc = build_incon(d, rep);
  CHECK(inc.t_epoch == 300.0);

  oracle::ScalarChain chain;
  chain.m0 = 50.0;
  chain.p0 = 100.0;
  chain.q = 0.49;
  chain.r = r * r;
  chain.z = {52.0, std::nullopt, 49.0, std::nullopt, std::nullopt, std::nullopt};
  const auto ref = oracle::rts_smooth(chain);
  CHECK(std::abs(inc.state.at("battery_wh").ml - ref[5].mean) < 1e-6);
  CHECK(std::abs(*inc.state.at("battery_wh").sigma - std::sqrt(ref[5].var)) < 1e-6);
  CHECK(*inc.state.at("battery_wh").sigma > r);
  REQUIRE(inc.open_anomalies.size() == 1);
  CHECK(inc.open_anomalies[0].message == "injected");
}

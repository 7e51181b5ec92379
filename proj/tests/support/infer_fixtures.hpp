#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "oracles/inference_oracles.hpp"
#include "ops/common/rng.hpp"
#include "ops/infer/model.hpp"
#include "ops/infer/solver.hpp"

namespace ops::testing {

/// Random-walk chain as a factor graph plus the matching scalar Kalman model.
struct ChainCase {
  infer::FactorGraph graph;
  oracle::ScalarChain chain;
};

inline ChainCase linear_chain(int n, std::uint64_t seed, double a = 1.0, double b = 0.0) {
  Rng rng(seed, "chain");
  ChainCase c;
  c.chain.m0 = 2.0;
  c.chain.p0 = 4.0;
  c.chain.a = a;
  c.chain.b = b;
  c.chain.q = 0.25;
  c.chain.r = 0.64;
  double x = c.chain.m0;
  for (int k = 0; k < n; ++k) {
    c.graph.add_variable({"x@" + std::to_string(k), "x", infer::VarKind::Continuous, 2, k, 0.0});
    if (k > 0) x = a * x + b + std::sqrt(c.chain.q) * rng.normal();
    if (k % 3 != 1)
      c.chain.z.push_back(x + std::sqrt(c.chain.r) * rng.normal());
    else
      c.chain.z.push_back(std::nullopt);  // leave gaps to smooth across
  }
  c.graph.add(infer::PriorFactor{0, c.chain.m0, std::sqrt(c.chain.p0)});
  for (int k = 0; k + 1 < n; ++k)
    c.graph.add(infer::ProcessFactor{k, k + 1, -1, a, b, 0.0, std::sqrt(c.chain.q)}, k + 1);
  for (int k = 0; k < n; ++k)
    if (c.chain.z[k]) c.graph.add(infer::MeasurementFactor{k, *c.chain.z[k], std::sqrt(c.chain.r)}, k);
  return c;
}

/// Random-walk chain with one detachable measurement per bin; `corrupt` (if
/// non-negative) gets +deviation·sigma added.
struct DetachCase {
  infer::FactorGraph graph;
  int n = 0;
  std::vector<oracle::Row> fixed, detachable;
  std::vector<double> penalty;
  std::vector<std::size_t> detachable_factors;  // graph factor index per detachable row
};

inline DetachCase detach_case(int k, std::uint64_t seed, int corrupt = -1, double deviation = 10.0,
                              double penalty = 12.5) {
  DetachCase c;
  c.n = k;
  const double q = 0.3, sigma = 1.0;
  for (int i = 0; i < k; ++i)
    c.graph.add_variable({"x@" + std::to_string(i), "x", infer::VarKind::Continuous, 2, i, 0.0});
  c.graph.add(infer::PriorFactor{0, 0.0, 10.0});
  c.fixed.push_back({{{0, 1.0}}, 0.0, 10.0});
  for (int i = 0; i + 1 < k; ++i) {
    c.graph.add(infer::ProcessFactor{i, i + 1, -1, 1.0, 0.0, 0.0, q}, i + 1);
    c.fixed.push_back({{{i + 1, 1.0}, {i, -1.0}}, 0.0, q});
  }
  Rng noise(seed, "detach.noise");
  std::vector<double> xs(k, 0.0);
  Rng walk(seed, "detach");
  double w = 0.0;
  for (int i = 0; i < k; ++i) {
    if (i > 0) w += q * walk.normal();
    xs[i] = w;
  }
  for (int i = 0; i < k; ++i) {
    double z = xs[i] + sigma * noise.normal();
    if (i == corrupt) z += deviation * sigma;
    c.detachable_factors.push_back(c.graph.add(infer::DetachableFactor{i, z, sigma, penalty}, i));
    c.detachable.push_back({{{i, 1.0}}, z, sigma});
    c.penalty.push_back(penalty);
  }
  return c;
}

inline std::vector<int> detach_vector(const infer::Hypothesis& h, const DetachCase& c) {
  std::vector<int> out;
  for (std::size_t f : c.detachable_factors) out.push_back(h.modes.factor[f]);
  return out;
}

/// Plume existence chain observed by a rate detector on channel detector.plume.
inline infer::StateEffectModel plume_model(double prior, const std::vector<std::vector<double>>& trans, double p_fp,
                                           double p_fn, double bin_s = 30.0) {
  Json j = {{"schema", "sem/1"},
            {"bin_s", bin_s},
            {"variables",
             {{{"name", "plume_exists"}, {"kind", "discrete"}, {"domain", 2}, {"prior", {1.0 - prior, prior}}},
              {{"name", "detector.plume"}, {"kind", "signal"}}}},
            {"effects",
             {{{"cause", "plume_exists"}, {"effect", "plume_exists"}, {"template", {{"type", "transition"}, {"probs", trans}}}},
              {{"cause", "plume_exists"},
               {"effect", "detector.plume"},
               {"template", {{"type", "detection"}, {"p_fp", p_fp}, {"p_fn", p_fn}}}}}}};
  return infer::sem_from_json(j);
}

}  // namespace ops::testing

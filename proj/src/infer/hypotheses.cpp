#include <algorithm>
#include <cmath>
#include <optional>

#include "ops/infer/solver.hpp"

namespace ops::infer {
namespace {

struct Unit {
  bool discrete = false;
  int index = 0;
  int domain = 2;
  int bin = 0;
};

std::vector<Unit> decision_units(const FactorGraph& g) {
  std::vector<Unit> units;
  for (std::size_t i = 0; i < g.variables.size(); ++i)
    if (g.variables[i].kind == VarKind::Discrete)
      units.push_back({true, static_cast<int>(i), g.variables[i].domain, g.variables[i].bin});
  for (std::size_t i = 0; i < g.factors.size(); ++i)
    if (is_multimodal(g.factors[i])) units.push_back({false, static_cast<int>(i), 2, g.factors[i].bin});
  std::stable_sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) { return a.bin < b.bin; });
  return units;
}

void assign(Modes& m, const Unit& u, int value) {
  (u.discrete ? m.discrete : m.factor)[u.index] = value;
}

bool ranks_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.accumulated_error != b.accumulated_error) return a.accumulated_error < b.accumulated_error;
  if (a.modes.discrete != b.modes.discrete) return a.modes.discrete < b.modes.discrete;
  return a.modes.factor < b.modes.factor;
}

std::optional<Hypothesis> try_solve(const FactorGraph& g, const Modes& modes, const std::vector<double>& x0,
                                    const SolverOptions& opt) {
  try {
    Hypothesis h = solve(g, modes, x0, opt);
    if (!std::isfinite(h.accumulated_error)) return std::nullopt;
    return h;
  } catch (const SingularSystem&) {
    return std::nullopt;
  }
}

// Solves every (modes, x0) job; failed and impossible ones are dropped.
std::vector<Hypothesis> solve_all(const FactorGraph& g, const std::vector<std::pair<Modes, const std::vector<double>*>>& jobs,
                                  const SolverOptions& opt, bool parallel) {
  std::vector<std::optional<Hypothesis>> out(jobs.size());
  const long n = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < n; ++i) out[i] = try_solve(g, jobs[i].first, *jobs[i].second, opt);
  std::vector<Hypothesis> hyps;
  for (auto& h : out)
    if (h) hyps.push_back(std::move(*h));
  std::sort(hyps.begin(), hyps.end(), ranks_before);
  return hyps;
}

constexpr std::size_t kExhaustiveFloor = 256;
constexpr std::size_t kCombinationCap = std::size_t{1} << 22;

}  // namespace

std::vector<Hypothesis> enumerate_hypotheses(const FactorGraph& g, std::size_t beam, bool parallel) {
  g.check();
  const std::vector<Unit> units = decision_units(g);
  std::vector<double> x0(g.variables.size());
  for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = g.variables[i].initial;

  std::size_t combos = 1;
  for (const auto& u : units) {
    combos = combos > kCombinationCap ? combos : combos * static_cast<std::size_t>(u.domain);
  }
  const std::size_t limit = std::max(kExhaustiveFloor, std::min(beam, kCombinationCap));
  const SolverOptions full{};

  if (combos <= limit) {
    std::vector<std::pair<Modes, const std::vector<double>*>> jobs;
    jobs.reserve(combos);
    for (std::size_t c = 0; c < combos; ++c) {
      Modes m = unassigned_modes(g);
      std::size_t rest = c;
      for (auto it = units.rbegin(); it != units.rend(); ++it) {
        assign(m, *it, static_cast<int>(rest % it->domain));
        rest /= it->domain;
      }
      jobs.emplace_back(std::move(m), &x0);
    }
    return solve_all(g, jobs, full, parallel);
  }

  const std::size_t width = std::min(beam, kCombinationCap);
  SolverOptions partial;
  partial.marginals = false;
  partial.allow_rank_deficient = true;
  std::vector<Hypothesis> frontier(1);
  frontier[0].modes = unassigned_modes(g);
  frontier[0].x = x0;
  for (const auto& u : units) {
    std::vector<std::pair<Modes, const std::vector<double>*>> jobs;
    for (const auto& h : frontier)
      for (int v = 0; v < u.domain; ++v) {
        Modes m = h.modes;
        assign(m, u, v);
        jobs.emplace_back(std::move(m), &h.x);
      }
    std::vector<Hypothesis> next = solve_all(g, jobs, partial, parallel);
    if (next.size() > width) next.resize(width);
    frontier = std::move(next);
    if (frontier.empty()) return {};
  }
  std::vector<std::pair<Modes, const std::vector<double>*>> jobs;
  for (const auto& h : frontier) jobs.emplace_back(h.modes, &h.x);
  return solve_all(g, jobs, full, parallel);
}

std::map<std::string, std::vector<double>> discrete_posterior(const FactorGraph& g,
                                                              const std::vector<Hypothesis>& hypotheses) {
  std::map<std::string, std::vector<double>> out;
  if (hypotheses.empty()) return out;
  double best = hypotheses.front().accumulated_error;
  for (const auto& h : hypotheses) best = std::min(best, h.accumulated_error);
  for (std::size_t v = 0; v < g.variables.size(); ++v) {
    if (g.variables[v].kind != VarKind::Discrete) continue;
    std::vector<double> p(g.variables[v].domain, 0.0);
    for (const auto& h : hypotheses) {
      const int value = h.modes.discrete[v];
      if (value >= 0) p[value] += std::exp(-(h.accumulated_error - best));
    }
    double sum = 0.0;
    for (double q : p) sum += q;
    if (sum > 0.0)
      for (double& q : p) q /= sum;
    out[g.variables[v].id] = std::move(p);
  }
  return out;
}

}  // namespace ops::infer

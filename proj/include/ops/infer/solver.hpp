#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ops/infer/factor_graph.hpp"

namespace ops::infer {

struct SolverOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-10;
  double initial_lambda = 0.0;  // 0: start as plain Gauss-Newton
  bool marginals = true;
  bool allow_rank_deficient = false;  // partial hypotheses: ridge instead of SingularSystem
};

struct Hypothesis {
  Modes modes;
  std::vector<double> x;       // continuous values, indexed like graph.variables
  std::vector<double> sigma;   // marginal std, NaN for discrete variables
  double accumulated_error = 0.0;
  int iterations = 0;
  bool converged = true;

  /// Mode of each multi-modal factor (detachable: 0/1, multi-association: value).
  std::map<std::size_t, int> factor_modes(const FactorGraph& g) const;
  std::vector<std::size_t> detached(const FactorGraph& g) const;
};

/// Levenberg-damped Gauss-Newton on the active residuals. Converged when the
/// step norm drops below the tolerance; after max_iterations the best iterate
/// is returned with converged = false. Throws SingularSystem when a connected
/// set of continuous variables has no unary factor.
Hypothesis solve(const FactorGraph& g, const Modes& modes, const SolverOptions& opt = {});
Hypothesis solve(const FactorGraph& g, const Modes& modes, const std::vector<double>& x0, const SolverOptions& opt);

inline constexpr std::size_t kUnboundedBeam = std::numeric_limits<std::size_t>::max();

/// Best-first search over decision units in time order, keeping the `beam`
/// lowest-error partial hypotheses per depth. Enumerates exhaustively when the
/// number of complete assignments is at most max(256, beam). Impossible and
/// singular hypotheses are dropped. Sorted ascending by accumulated error.
std::vector<Hypothesis> enumerate_hypotheses(const FactorGraph& g, std::size_t beam = 32, bool parallel = true);

/// Hypotheses weighted by exp(-accumulated_error), marginalized onto every
/// discrete variable: id -> probability per value.
std::map<std::string, std::vector<double>> discrete_posterior(const FactorGraph& g,
                                                              const std::vector<Hypothesis>& hypotheses);

}  // namespace ops::infer

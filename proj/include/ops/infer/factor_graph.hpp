#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "ops/common/error.hpp"

namespace ops::infer {

OPS_DEFINE_ERROR(ModelError, "MODEL_ERROR");
OPS_DEFINE_ERROR(SingularSystem, "SINGULAR_SYSTEM");

enum class VarKind { Continuous, Discrete };

struct Variable {
  std::string id;    // "name@bin" for per-timestep variables, "name" otherwise
  std::string name;  // model variable name
  VarKind kind = VarKind::Continuous;
  int domain = 2;    // discrete only
  int bin = -1;      // -1 for global variables
  double initial = 0.0;
};

/// Probability that a thresholded detector fires: the detector statistic is
/// N(mu, s) and fires above the threshold.
double detect_probability(bool detected, double threshold, double mu, double s);

/// Residual whose half-square is -log P(detection | threshold). Nonlinear in
/// the threshold variable.
struct DetectionResidual {
  int threshold_var = -1;
  bool detected = false;
  double mu = 0.0;
  double s = 1.0;

  double value(double threshold) const;
  double derivative(double threshold) const;
};

struct PriorFactor {
  int var = -1;
  double mean = 0.0;
  double sigma = 1.0;
};

/// x_to = a·x_from + b + c·x_input, Gaussian with `sigma`.
struct ProcessFactor {
  int from = -1;
  int to = -1;
  int input = -1;
  double a = 1.0, b = 0.0, c = 0.0;
  double sigma = 1.0;
};

struct MeasurementFactor {
  int var = -1;
  double observed = 0.0;
  double sigma = 1.0;
};

/// Attached: a measurement. Detached: no residual, fixed `penalty`.
struct DetachableFactor {
  int var = -1;
  double observed = 0.0;
  double sigma = 1.0;
  double penalty = 4.5;
};

/// One term per value of the discrete variable: a constant penalty plus an
/// optional nonlinear detection residual on a continuous variable.
struct ModeTerm {
  double penalty = 0.0;  // +inf marks an impossible mode
  std::vector<DetectionResidual> residuals;
};

struct MultiAssociationFactor {
  int discrete = -1;
  std::vector<ModeTerm> modes;
};

struct TransitionFactor {
  int from = -1;
  int to = -1;
  std::vector<std::vector<double>> probs;  // probs[from value][to value]
};

/// Prior over a discrete variable's values.
struct DiscretePriorFactor {
  int var = -1;
  std::vector<double> probs;
};

using FactorBody = std::variant<PriorFactor, ProcessFactor, MeasurementFactor, DetachableFactor, MultiAssociationFactor,
                                TransitionFactor, DiscretePriorFactor>;

struct Factor {
  FactorBody body;
  int bin = 0;           // time order for hypothesis expansion
  std::string label;     // provenance, e.g. "measurement battery_wh@t=120"
};

std::string_view kind_name(const FactorBody& f);
bool is_multimodal(const Factor& f);
/// Continuous variables a factor's residuals touch (for the active mode).
std::vector<int> continuous_vars(const Factor& f, int mode);

struct FactorGraph {
  std::vector<Variable> variables;
  std::vector<Factor> factors;
  double bin_s = 0.0;

  int add_variable(Variable v);
  int find(const std::string& id) const;  // -1 if absent
  const Variable& var(const std::string& id) const;
  std::size_t add(FactorBody body, int bin = 0, std::string label = {});

  /// Checks variable references, sigmas, penalties and transition rows.
  void check() const;
};

/// Hypothesis decision units: every discrete variable (one choice per value)
/// and every detachable factor (attached or detached).
struct Modes {
  std::vector<int> discrete;  // indexed like graph.variables; -1 unassigned or continuous
  std::vector<int> factor;    // indexed like graph.factors; detachable: 0 attached / 1 detached, -1 unassigned
};

Modes unassigned_modes(const FactorGraph& g);

/// Residual rows of one factor under `modes`; each row lists (var, dr/dvar).
struct ResidualRow {
  double r = 0.0;
  std::vector<std::pair<int, double>> jac;
};

/// Returns false when the factor is inactive under `modes` (unassigned or
/// detached). Adds the factor's constant penalty to `penalty`.
bool linearize(const FactorGraph& g, const Factor& f, std::size_t index, const Modes& modes,
               const std::vector<double>& x, std::vector<ResidualRow>& rows, double& penalty);

/// ½·Σ r² + Σ penalties over active factors at x.
double total_error(const FactorGraph& g, const Modes& modes, const std::vector<double>& x);

}  // namespace ops::infer

#include <cmath>
#include <numbers>

#include "ops/common/rng.hpp"
#include "ops/infer/factor_graph.hpp"

namespace ops::infer {
namespace {

// -log Phi(z) and its derivative, stable in both tails.
double neg_log_phi(double z) {
  if (z > 0.0) return -std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  if (z > -30.0) return -std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  const double z2 = z * z;
  return 0.5 * z2 + std::log(-z) + 0.5 * std::log(2.0 * std::numbers::pi) - std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

double neg_log_phi_derivative(double z) {
  if (z > -30.0) {
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return -pdf / (0.5 * std::erfc(-z / std::numbers::sqrt2));
  }
  const double z2 = z * z;
  return z / (1.0 - 1.0 / z2 + 3.0 / (z2 * z2));
}

}  // namespace

double detect_probability(bool detected, double threshold, double mu, double s) {
  const double z = (threshold - mu) / s;
  return detected ? normal_cdf(-z) : normal_cdf(z);
}

double DetectionResidual::value(double threshold) const {
  const double z = detected ? (mu - threshold) / s : (threshold - mu) / s;
  return std::sqrt(2.0 * std::max(0.0, neg_log_phi(z)));
}

double DetectionResidual::derivative(double threshold) const {
  const double z = detected ? (mu - threshold) / s : (threshold - mu) / s;
  const double dz = detected ? -1.0 / s : 1.0 / s;
  const double r = value(threshold);
  if (r <= 0.0) return 0.0;
  return neg_log_phi_derivative(z) * dz / r;
}

std::string_view kind_name(const FactorBody& f) {
  switch (f.index()) {
    case 0: return "Prior";
    case 1: return "Process";
    case 2: return "Measurement";
    case 3: return "DetachableMeasurement";
    case 4: return "MultiAssociation";
    case 5: return "DiscreteTransition";
    case 6: return "DiscretePrior";
  }
  return "?";
}

bool is_multimodal(const Factor& f) { return std::holds_alternative<DetachableFactor>(f.body); }

std::vector<int> continuous_vars(const Factor& f, int mode) {
  return std::visit(
      [&](const auto& b) -> std::vector<int> {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, PriorFactor> || std::is_same_v<T, MeasurementFactor>) {
          return {b.var};
        } else if constexpr (std::is_same_v<T, DetachableFactor>) {
          return mode == 1 ? std::vector<int>{} : std::vector<int>{b.var};
        } else if constexpr (std::is_same_v<T, ProcessFactor>) {
          std::vector<int> v{b.from, b.to};
          if (b.input >= 0) v.push_back(b.input);
          return v;
        } else if constexpr (std::is_same_v<T, MultiAssociationFactor>) {
          std::vector<int> v;
          if (mode >= 0 && mode < static_cast<int>(b.modes.size()))
            for (const auto& r : b.modes[mode].residuals) v.push_back(r.threshold_var);
          return v;
        } else {
          return {};
        }
      },
      f.body);
}

int FactorGraph::add_variable(Variable v) {
  if (find(v.id) >= 0) throw ModelError("duplicate variable \"" + v.id + "\"");
  variables.push_back(std::move(v));
  return static_cast<int>(variables.size()) - 1;
}

int FactorGraph::find(const std::string& id) const {
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (variables[i].id == id) return static_cast<int>(i);
  return -1;
}

const Variable& FactorGraph::var(const std::string& id) const {
  const int i = find(id);
  if (i < 0) throw ModelError("unknown variable \"" + id + "\"");
  return variables[i];
}

std::size_t FactorGraph::add(FactorBody body, int bin, std::string label) {
  factors.push_back({std::move(body), bin, std::move(label)});
  return factors.size() - 1;
}

void FactorGraph::check() const {
  const int n = static_cast<int>(variables.size());
  auto need = [&](int v, VarKind kind, const char* what) {
    if (v < 0 || v >= n) throw ModelError(std::string(what) + " references a missing variable");
    if (variables[v].kind != kind) throw ModelError(std::string(what) + " references a variable of the wrong kind");
  };
  auto positive = [](double s, const char* what) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ModelError(std::string(what) + ": sigma must be positive");
  };
  for (const auto& f : factors) {
    std::visit(
        [&](const auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, PriorFactor> || std::is_same_v<T, MeasurementFactor>) {
            need(b.var, VarKind::Continuous, "unary factor");
            positive(b.sigma, "unary factor");
          } else if constexpr (std::is_same_v<T, DetachableFactor>) {
            need(b.var, VarKind::Continuous, "detachable factor");
            positive(b.sigma, "detachable factor");
            if (!(b.penalty > 0.0)) throw ModelError("detach penalty must be positive");
          } else if constexpr (std::is_same_v<T, ProcessFactor>) {
            need(b.from, VarKind::Continuous, "process factor");
            need(b.to, VarKind::Continuous, "process factor");
            if (b.input >= 0) need(b.input, VarKind::Continuous, "process factor");
            positive(b.sigma, "process factor");
          } else if constexpr (std::is_same_v<T, MultiAssociationFactor>) {
            need(b.discrete, VarKind::Discrete, "multi-association factor");
            if (static_cast<int>(b.modes.size()) != variables[b.discrete].domain)
              throw ModelError("multi-association factor needs one mode per discrete value");
            for (const auto& m : b.modes)
              for (const auto& r : m.residuals) {
                need(r.threshold_var, VarKind::Continuous, "detection residual");
                positive(r.s, "detection residual");
              }
          } else if constexpr (std::is_same_v<T, DiscretePriorFactor>) {
            need(b.var, VarKind::Discrete, "discrete prior");
            if (static_cast<int>(b.probs.size()) != variables[b.var].domain)
              throw ModelError("discrete prior needs one probability per value");
            double sum = 0.0;
            for (double p : b.probs) {
              if (!(p >= 0.0)) throw ModelError("prior probabilities must be non-negative");
              sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9) throw ModelError("discrete prior must sum to 1");
          } else {
            need(b.from, VarKind::Discrete, "transition factor");
            need(b.to, VarKind::Discrete, "transition factor");
            if (static_cast<int>(b.probs.size()) != variables[b.from].domain)
              throw ModelError("transition matrix rows must match the domain");
            for (const auto& row : b.probs) {
              if (static_cast<int>(row.size()) != variables[b.to].domain)
                throw ModelError("transition matrix columns must match the domain");
              double sum = 0.0;
              for (double p : row) {
                if (!(p >= 0.0)) throw ModelError("transition probabilities must be non-negative");
                sum += p;
              }
              if (std::abs(sum - 1.0) > 1e-9) throw ModelError("transition rows must sum to 1");
            }
          }
        },
        f.body);
  }
}

Modes unassigned_modes(const FactorGraph& g) {
  return {std::vector<int>(g.variables.size(), -1), std::vector<int>(g.factors.size(), -1)};
}

bool linearize(const FactorGraph& g, const Factor& f, std::size_t index, const Modes& modes,
               const std::vector<double>& x, std::vector<ResidualRow>& rows, double& penalty) {
  return std::visit(
      [&](const auto& b) -> bool {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, PriorFactor>) {
          rows.push_back({(x[b.var] - b.mean) / b.sigma, {{b.var, 1.0 / b.sigma}}});
          return true;
        } else if constexpr (std::is_same_v<T, MeasurementFactor>) {
          rows.push_back({(x[b.var] - b.observed) / b.sigma, {{b.var, 1.0 / b.sigma}}});
          return true;
        } else if constexpr (std::is_same_v<T, DetachableFactor>) {
          const int m = modes.factor[index];
          if (m < 0) return false;
          if (m == 1) {
            penalty += b.penalty;
            return true;
          }
          rows.push_back({(x[b.var] - b.observed) / b.sigma, {{b.var, 1.0 / b.sigma}}});
          return true;
        } else if constexpr (std::is_same_v<T, ProcessFactor>) {
          double pred = b.a * x[b.from] + b.b;
          ResidualRow row;
          row.jac = {{b.to, 1.0 / b.sigma}, {b.from, -b.a / b.sigma}};
          if (b.input >= 0) {
            pred += b.c * x[b.input];
            row.jac.push_back({b.input, -b.c / b.sigma});
          }
          row.r = (x[b.to] - pred) / b.sigma;
          rows.push_back(std::move(row));
          return true;
        } else if constexpr (std::is_same_v<T, MultiAssociationFactor>) {
          const int v = modes.discrete[b.discrete];
          if (v < 0) return false;
          const auto& term = b.modes[v];
          penalty += term.penalty;
          for (const auto& r : term.residuals)
            rows.push_back({r.value(x[r.threshold_var]), {{r.threshold_var, r.derivative(x[r.threshold_var])}}});
          return true;
        } else if constexpr (std::is_same_v<T, DiscretePriorFactor>) {
          const int v = modes.discrete[b.var];
          if (v < 0) return false;
          penalty += b.probs[v] > 0.0 ? -std::log(b.probs[v]) : std::numeric_limits<double>::infinity();
          return true;
        } else {
          const int a = modes.discrete[b.from], c = modes.discrete[b.to];
          if (a < 0 || c < 0) return false;
          const double p = b.probs[a][c];
          penalty += p > 0.0 ? -std::log(p) : std::numeric_limits<double>::infinity();
          return true;
        }
      },
      f.body);
}

double total_error(const FactorGraph& g, const Modes& modes, const std::vector<double>& x) {
  std::vector<ResidualRow> rows;
  double penalty = 0.0;
  for (std::size_t i = 0; i < g.factors.size(); ++i) linearize(g, g.factors[i], i, modes, x, rows, penalty);
  double e = penalty;
  for (const auto& r : rows) e += 0.5 * r.r * r.r;
  return e;
}

}  // namespace ops::infer

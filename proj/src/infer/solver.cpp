#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <numeric>

#include "ops/infer/solver.hpp"

namespace ops::infer {
namespace {

struct Linearized {
  std::vector<ResidualRow> rows;
  double penalty = 0.0;
  double error() const {
    double e = penalty;
    for (const auto& r : rows) e += 0.5 * r.r * r.r;
    return e;
  }
};

Linearized linearize_all(const FactorGraph& g, const Modes& modes, const std::vector<double>& x) {
  Linearized l;
  for (std::size_t i = 0; i < g.factors.size(); ++i) linearize(g, g.factors[i], i, modes, x, l.rows, l.penalty);
  return l;
}

int find_root(std::vector<int>& parent, int a) {
  while (parent[a] != a) a = parent[a] = parent[parent[a]];
  return a;
}

// Columns for continuous variables touched by at least one active row. With
// `strict`, every continuous variable must be touched and every connected
// component must contain a unary row.
std::vector<int> active_columns(const FactorGraph& g, const std::vector<ResidualRow>& rows, bool strict) {
  const int n = static_cast<int>(g.variables.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<char> touched(n, 0), anchored(n, 0);
  for (const auto& row : rows) {
    if (row.jac.empty()) continue;
    for (const auto& [v, _] : row.jac) touched[v] = 1;
    const int r0 = find_root(parent, row.jac.front().first);
    for (const auto& [v, _] : row.jac) parent[find_root(parent, v)] = r0;
    if (row.jac.size() == 1) anchored[row.jac.front().first] = 1;
  }
  std::vector<char> root_anchored(n, 0);
  for (int v = 0; v < n; ++v)
    if (anchored[v]) root_anchored[find_root(parent, v)] = 1;
  std::vector<int> col(n, -1);
  int next = 0;
  for (int v = 0; v < n; ++v) {
    if (g.variables[v].kind != VarKind::Continuous) continue;
    if (!touched[v]) {
      if (strict) throw SingularSystem("variable \"" + g.variables[v].id + "\" is not constrained by any factor");
      continue;
    }
    if (strict && !root_anchored[find_root(parent, v)])
      throw SingularSystem("variable \"" + g.variables[v].id + "\" belongs to a component without a unary factor");
    col[v] = next++;
  }
  return col;
}

using SpMat = Eigen::SparseMatrix<double>;

SpMat normal_matrix(const std::vector<ResidualRow>& rows, const std::vector<int>& col, int n, Eigen::VectorXd* grad) {
  std::vector<Eigen::Triplet<double>> trip;
  if (grad) grad->setZero(n);
  for (const auto& row : rows) {
    for (const auto& [vi, ji] : row.jac) {
      const int ci = col[vi];
      if (ci < 0) continue;
      if (grad) (*grad)[ci] += ji * row.r;
      for (const auto& [vj, jj] : row.jac) {
        const int cj = col[vj];
        if (cj >= 0) trip.emplace_back(ci, cj, ji * jj);
      }
    }
  }
  SpMat h(n, n);
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

}  // namespace

std::map<std::size_t, int> Hypothesis::factor_modes(const FactorGraph& g) const {
  std::map<std::size_t, int> out;
  for (std::size_t i = 0; i < g.factors.size(); ++i) {
    if (const auto* m = std::get_if<MultiAssociationFactor>(&g.factors[i].body))
      out[i] = modes.discrete[m->discrete];
    else if (is_multimodal(g.factors[i]))
      out[i] = modes.factor[i];
  }
  return out;
}

std::vector<std::size_t> Hypothesis::detached(const FactorGraph& g) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.factors.size(); ++i)
    if (is_multimodal(g.factors[i]) && modes.factor[i] == 1) out.push_back(i);
  return out;
}

Hypothesis solve(const FactorGraph& g, const Modes& modes, const SolverOptions& opt) {
  std::vector<double> x0(g.variables.size());
  for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = g.variables[i].initial;
  return solve(g, modes, x0, opt);
}

Hypothesis solve(const FactorGraph& g, const Modes& modes, const std::vector<double>& x0, const SolverOptions& opt) {
  Hypothesis h;
  h.modes = modes;
  h.x = x0;
  h.sigma.assign(g.variables.size(), std::numeric_limits<double>::quiet_NaN());

  Linearized lin = linearize_all(g, modes, h.x);
  const std::vector<int> col = active_columns(g, lin.rows, !opt.allow_rank_deficient);
  const int n = std::accumulate(col.begin(), col.end(), 0, [](int a, int c) { return a + (c >= 0 ? 1 : 0); });
  double err = lin.error();
  h.accumulated_error = err;
  if (!std::isfinite(lin.penalty) || n == 0) return h;

  // A tiny ridge keeps partially assigned (rank-deficient) systems solvable.
  const double ridge = opt.allow_rank_deficient ? 1e-9 : 0.0;
  double lambda = opt.initial_lambda;
  h.converged = false;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  for (int it = 0; it < opt.max_iterations; ++it) {
    h.iterations = it + 1;
    Eigen::VectorXd grad;
    const SpMat hess = normal_matrix(lin.rows, col, n, &grad);
    bool accepted = false, tiny = false;
    while (!accepted) {
      SpMat damped = hess;
      for (int i = 0; i < n; ++i) damped.coeffRef(i, i) += lambda * (1.0 + hess.coeff(i, i)) + ridge;
      ldlt.compute(damped);
      if (ldlt.info() != Eigen::Success) {
        if (!opt.allow_rank_deficient && lambda == 0.0) throw SingularSystem("normal matrix is singular");
        lambda = lambda == 0.0 ? 1e-6 : lambda * 10.0;
        continue;
      }
      const Eigen::VectorXd step = ldlt.solve(-grad);
      const double step_norm = step.norm();
      std::vector<double> xn = h.x;
      for (std::size_t v = 0; v < col.size(); ++v)
        if (col[v] >= 0) xn[v] += step[col[v]];
      Linearized ln = linearize_all(g, modes, xn);
      const double en = ln.error();
      if (en <= err || step_norm < opt.step_tolerance) {
        h.x = std::move(xn);
        lin = std::move(ln);
        err = std::min(en, err);
        accepted = true;
        lambda = lambda < 1e-9 ? 0.0 : lambda * 0.1;
        tiny = step_norm < opt.step_tolerance;
      } else {
        lambda = lambda == 0.0 ? 1e-6 : lambda * 10.0;
        if (lambda > 1e12) {
          tiny = true;
          break;
        }
      }
    }
    if (tiny) {
      h.converged = true;
      break;
    }
  }
  h.accumulated_error = lin.error();

  if (opt.marginals) {
    const SpMat hess = normal_matrix(lin.rows, col, n, nullptr);
    ldlt.compute(hess);
    if (ldlt.info() != Eigen::Success) throw SingularSystem("normal matrix is singular");
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (std::size_t v = 0; v < col.size(); ++v) {
      if (col[v] < 0) continue;
      e[col[v]] = 1.0;
      const Eigen::VectorXd c = ldlt.solve(e);
      e[col[v]] = 0.0;
      h.sigma[v] = c[col[v]] > 0.0 ? std::sqrt(c[col[v]]) : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return h;
}

}  // namespace ops::infer

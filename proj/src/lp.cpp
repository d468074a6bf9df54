#include "epr/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "epr/kernels.hpp"

namespace epr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tableau with an attached reduced-cost row. Column layout:
// [0, n_real) original variables, [n_real, n_total) artificials,
// column n_total holds the RHS.
struct Tableau {
  std::size_t m;        // active rows
  std::size_t n_real;
  std::size_t n_total;
  std::size_t stride;   // n_total + 1
  std::vector<double> t;          // (m+1) x stride; row m = reduced costs
  std::vector<std::size_t> basis;  // basis[i] = column basic in row i

  double* row(std::size_t i) { return t.data() + i * stride; }
  const double* row(std::size_t i) const { return t.data() + i * stride; }
  double* cost_row() { return row(m); }
  double rhs(std::size_t i) const { return row(i)[n_total]; }
};

void pivot(Tableau& tab, std::size_t pr, std::size_t pc) {
  double* prow = tab.row(pr);
  const double inv = 1.0 / prow[pc];
  for (std::size_t j = 0; j <= tab.n_total; ++j) prow[j] *= inv;
  prow[pc] = 1.0;
  for (std::size_t i = 0; i <= tab.m; ++i) {
    if (i == pr) continue;
    double* r = tab.row(i);
    const double factor = r[pc];
    if (factor == 0.0) continue;
    kernels::axpy(-factor, prow, r, tab.n_total + 1);
    r[pc] = 0.0;
  }
  tab.basis[pr] = pc;
}

// Rebuilds reduced costs for the given objective: r_j = c_j - y'A_j with
// y' = c_B B^{-1}, done by eliminating basic columns from a fresh cost row.
void rebuild_cost_row(Tableau& tab, const std::vector<double>& cost) {
  double* cr = tab.cost_row();
  for (std::size_t j = 0; j <= tab.n_total; ++j) cr[j] = j < cost.size() ? cost[j] : 0.0;
  cr[tab.n_total] = 0.0;
  for (std::size_t i = 0; i < tab.m; ++i) {
    const double cb = cr[tab.basis[i]];
    if (cb == 0.0) continue;
    kernels::axpy(-cb, tab.row(i), cr, tab.n_total + 1);
    cr[tab.basis[i]] = 0.0;
  }
}

enum class PhaseOutcome { optimal, unbounded, iteration_limit };

// Runs simplex iterations on the current cost row, pricing columns in
// [0, price_limit). Returns when no reduced cost is below -tol.
PhaseOutcome run_simplex(Tableau& tab, std::size_t price_limit, const LpOptions& opt,
                         std::size_t max_pivots, std::size_t& pivots) {
  const double* cr_const = tab.cost_row();
  double cost_scale = 1.0;
  for (std::size_t j = 0; j < price_limit; ++j) {
    cost_scale = std::max(cost_scale, std::abs(cr_const[j]));
  }
  const double rtol = opt.opt_tol * cost_scale;
  std::size_t degenerate_streak = 0;
  bool bland = false;

  while (true) {
    double* cr = tab.cost_row();
    std::size_t entering = price_limit;
    if (!bland) {
      const std::size_t j = kernels::min_index(cr, price_limit);
      if (cr[j] < -rtol) entering = j;
    } else {
      for (std::size_t j = 0; j < price_limit; ++j) {
        if (cr[j] < -rtol) {
          entering = j;
          break;
        }
      }
    }
    if (entering == price_limit) return PhaseOutcome::optimal;

    std::size_t leaving = tab.m;
    double best_ratio = kInf;
    for (std::size_t i = 0; i < tab.m; ++i) {
      const double aij = tab.row(i)[entering];
      if (aij <= opt.pivot_tol) continue;
      const double ratio = tab.rhs(i) / aij;
      if (ratio < best_ratio - 1e-12 ||
          (ratio < best_ratio + 1e-12 &&
           (leaving == tab.m || tab.basis[i] < tab.basis[leaving]))) {
        best_ratio = ratio;
        leaving = i;
      }
    }
    if (leaving == tab.m) return PhaseOutcome::unbounded;

    if (best_ratio <= 1e-12) {
      if (++degenerate_streak > 200) bland = true;
    } else {
      degenerate_streak = 0;
    }
    pivot(tab, leaving, entering);
    if (++pivots >= max_pivots) return PhaseOutcome::iteration_limit;
  }
}

// Recomputes the tableau body exactly from the original problem through an
// LU factorization of the current basis. Returns false if the basis matrix
// is numerically singular.
bool refactorize(Tableau& tab, const LpProblem& p) {
  const std::size_t m = tab.m;
  Eigen::MatrixXd basis_mat(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t col = 0; col < m; ++col) {
      const std::size_t j = tab.basis[col];
      // Artificial columns are identity columns of their original row.
      basis_mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) =
          j < p.cols ? p.at(i, j) : (j - p.cols == i ? 1.0 : 0.0);
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_mat);
  if (std::abs(lu.determinant()) < 1e-300) return false;

  Eigen::MatrixXd rhs(m, tab.n_total + 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < tab.n_total; ++j) {
      rhs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          j < p.cols ? p.at(i, j) : (j - p.cols == i ? 1.0 : 0.0);
    }
    rhs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(tab.n_total)) = p.b[i];
  }
  Eigen::MatrixXd solved = lu.solve(rhs);
  for (std::size_t i = 0; i < m; ++i) {
    double* r = tab.row(i);
    for (std::size_t j = 0; j <= tab.n_total; ++j) {
      r[j] = solved(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return true;
}

}  // namespace

LpResult solve_lp(const LpProblem& problem, const LpOptions& options) {
  LpResult result;
  const std::size_t m = problem.rows;
  const std::size_t n = problem.cols;
  if (problem.a.size() != m * n || problem.b.size() != m || problem.c.size() != n) {
    throw SolverError("inconsistent LP dimensions");
  }

  // Working copy with b >= 0.
  LpProblem p = problem;
  for (std::size_t i = 0; i < m; ++i) {
    if (p.b[i] < 0.0) {
      p.b[i] = -p.b[i];
      for (std::size_t j = 0; j < n; ++j) p.at(i, j) = -p.at(i, j);
    }
  }

  Tableau tab;
  tab.m = m;
  tab.n_real = n;
  tab.n_total = n + m;  // one artificial per row; unused ones never enter
  tab.stride = tab.n_total + 1;
  tab.t.assign((m + 1) * tab.stride, 0.0);
  tab.basis.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    double* r = tab.row(i);
    for (std::size_t j = 0; j < n; ++j) r[j] = p.at(i, j);
    r[n + i] = 1.0;
    r[tab.n_total] = p.b[i];
    tab.basis[i] = n + i;
  }

  // Seed the basis with ready-made identity columns (the L1 slack pairs
  // provide one per residual row), shrinking phase 1 to the leftovers.
  std::vector<bool> col_used(n, false);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (col_used[j] || p.at(i, j) != 1.0 || p.c[j] < 0.0) continue;
      bool identity = true;
      for (std::size_t i2 = 0; i2 < m && identity; ++i2) {
        if (i2 != i && p.at(i2, j) != 0.0) identity = false;
      }
      if (identity) {
        tab.basis[i] = j;
        tab.row(i)[n + i] = 0.0;
        col_used[j] = true;
        break;
      }
    }
  }

  const std::size_t max_pivots =
      options.max_pivots > 0 ? options.max_pivots : 200 + 40 * (m + n);

  // Phase 1: minimize the sum of artificials that remained basic.
  std::vector<double> phase1_cost(tab.n_total, 0.0);
  bool need_phase1 = false;
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis[i] >= n) {
      phase1_cost[tab.basis[i]] = 1.0;
      need_phase1 = true;
    }
  }
  if (need_phase1) {
    rebuild_cost_row(tab, phase1_cost);
    const PhaseOutcome out =
        run_simplex(tab, tab.n_total, options, max_pivots, result.pivots);
    if (out == PhaseOutcome::iteration_limit) {
      result.status = LpStatus::iteration_limit;
      return result;
    }
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis[i] >= n) infeasibility += tab.rhs(i);
    }
    double b_scale = 1.0;
    for (double v : p.b) b_scale = std::max(b_scale, std::abs(v));
    if (infeasibility > 1e-8 * b_scale) {
      result.status = LpStatus::infeasible;
      return result;
    }
    // Force remaining zero-level artificials out of the basis.
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis[i] < n) continue;
      std::size_t j = n;
      for (std::size_t cand = 0; cand < n; ++cand) {
        if (std::abs(tab.row(i)[cand]) > options.pivot_tol * 10) {
          j = cand;
          break;
        }
      }
      if (j < n) {
        pivot(tab, i, j);
        ++result.pivots;
      }
      // A fully zero row is redundant; its artificial stays basic at zero
      // and never re-enters because phase 2 prices real columns only.
    }
  }

  // Phase 2 on the true objective, pricing real columns only.
  std::vector<double> phase2_cost(tab.n_total, 0.0);
  std::copy(p.c.begin(), p.c.end(), phase2_cost.begin());
  for (int round = 0;; ++round) {
    rebuild_cost_row(tab, phase2_cost);
    const PhaseOutcome out = run_simplex(tab, n, options, max_pivots, result.pivots);
    if (out == PhaseOutcome::unbounded) {
      result.status = LpStatus::unbounded;
      return result;
    }
    if (out == PhaseOutcome::iteration_limit) {
      result.status = LpStatus::iteration_limit;
      break;
    }
    // Certificate: rebuild the tableau exactly from the original data and
    // re-check the reduced costs; loop if drift hid an improving column.
    if (!refactorize(tab, p)) break;
    rebuild_cost_row(tab, phase2_cost);
    double cost_scale = 1.0;
    for (std::size_t j = 0; j < n; ++j) cost_scale = std::max(cost_scale, std::abs(p.c[j]));
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      worst = std::max(worst, -tab.cost_row()[j]);
    }
    result.max_dual_violation = std::max(0.0, worst) / cost_scale;
    if (worst <= options.opt_tol * cost_scale || round >= 3) break;
    ++result.refinements;
  }

  result.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis[i] < n) result.x[tab.basis[i]] = std::max(0.0, tab.rhs(i));
  }
  result.objective = kernels::dot(result.x.data(), p.c.data(), n);
  if (result.status != LpStatus::iteration_limit) result.status = LpStatus::optimal;
  return result;
}

}  // namespace epr

#pragma once

// Dense linear-program solver: min c'x subject to A x = b, x >= 0.
//
// Two-phase tableau simplex. Dantzig pricing with a permanent switch to
// Bland's rule once degeneracy stalls, deterministic tie-breaking, and a
// post-termination refactorization of the tableau from the original data
// through an LU solve of the basis, which both certifies optimality
// independently of accumulated tableau drift and repairs it when needed.
// Sized for this project's L1-fit subproblems (hundreds of rows).

#include <cstdint>
#include <vector>

#include "epr/types.hpp"

namespace epr {

struct LpProblem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // row-major rows x cols
  std::vector<double> b;
  std::vector<double> c;

  double& at(std::size_t r, std::size_t col) { return a[r * cols + col]; }
  double at(std::size_t r, std::size_t col) const { return a[r * cols + col]; }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpOptions {
  double pivot_tol = 1e-9;
  double opt_tol = 1e-9;       // reduced-cost tolerance, relative to cost scale
  std::size_t max_pivots = 0;  // 0: automatic (scales with problem size)
};

struct LpResult {
  LpStatus status = LpStatus::optimal;
  std::vector<double> x;
  double objective = 0.0;   // recomputed as c'x from the original data
  std::size_t pivots = 0;
  std::size_t refinements = 0;
  double max_dual_violation = 0.0;  // from the certificate pass
};

LpResult solve_lp(const LpProblem& problem, const LpOptions& options = {});

}  // namespace epr

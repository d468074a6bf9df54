#pragma once

// Reconciling observed coincidence counts with no-signaling through
// per-(setting, result) detection-efficiency ratios.
//
// Pipeline: estimate per-cell false positives from singles counts, subtract
// to get true coincidences W_T, solve the four no-signaling conditions for
// the efficiency ratios lambda(s,1)/lambda(s,0) on each side, normalize
// W_T / (lambda_A * lambda_B) into probabilities, then check the Masanes
// correlation bounds and the Adenier-Khrennikov one-sided assumption.

#include <array>
#include <vector>

#include "epr/types.hpp"

namespace epr {

// W_F(s_A,s_B,r_A,r_B) = D_A(s_A,r_A) * D_B(s_B,r_B) * width / T.
Cell16 per_cell_false_positives(const SinglesTable& singles, std::int64_t window_width_ps,
                                std::int64_t span_ps);

struct TrueFalseDecomposition {
  Cell16 w_tot{};
  Cell16 w_true{};   // max(W_tot - W_F, 0)
  Cell16 w_false{};
  std::vector<std::size_t> clamped_cells;  // cells where W_tot < W_F
};

TrueFalseDecomposition decompose(const CellTable& w_tot, const Cell16& w_false);

struct RatioPair {
  double r0 = 0.0;  // lambda(0,1)/lambda(0,0)
  double r1 = 0.0;  // lambda(1,1)/lambda(1,0)
};

struct EfficiencyRatios {
  double a0 = 1.0, a1 = 1.0;  // Alice: lambda_A(s,1)/lambda_A(s,0)
  double b0 = 1.0, b1 = 1.0;  // Bob
  std::array<double, 4> residuals{};  // relative residuals of the four conditions
  bool unique = true;
  std::vector<RatioPair> alice_roots;  // all positive solutions found
  std::vector<RatioPair> bob_roots;
};

// The no-signaling conditions with C = W_T/(lambda_A lambda_B) substituted
// split into two independent 2x2 systems (the local side's factors cancel
// within each condition). Each system is a pair of Moebius equations in the
// reciprocal ratios and eliminates to a quadratic, so every positive root
// is enumerated in closed form, then polished with damped Newton.
// Throws SolverError when a system has no positive root or a needed
// cell of W_T is zero.
EfficiencyRatios solve_efficiency_ratios(const Cell16& w_true);

struct ProbabilityTable {
  Cell16 p{};  // each (s_A,s_B) block sums to 1

  double at(int s_a, int s_b, int r_a, int r_b) const {
    return p[CellTable::index(s_a, s_b, r_a, r_b)];
  }
};

ProbabilityTable normalized_probabilities(const Cell16& w_true, const EfficiencyRatios& ratios);

// E(s_A,s_B) = agree - disagree from a probability table.
std::array<double, 4> correlations_from_probabilities(const ProbabilityTable& table);

struct MasanesResult {
  bool pass = false;
  double margin = 0.0;        // pi - worst |sum|; negative means failure
  double worst_abs_sum = 0.0;
};

// |asin E(0,0) +- asin E(0,1) +- asin E(1,0) +- asin E(1,1)| <= pi over the
// sign patterns with an odd number of minus signs.
MasanesResult masanes_check(const std::array<double, 4>& correlations);

struct AkDiscrepancy {
  Side side = Side::alice;
  int setting = 0;
  double singles_ratio = 0.0;  // D(s,1)/D(s,0)
  double lambda_ratio = 0.0;   // lambda(s,1)/lambda(s,0)
  double relative_gap = 0.0;   // |singles - lambda| / lambda
};

// Eq-(7)-style comparison: the one-sided fair-sampling assumption equates
// the singles ratios with the efficiency ratios; report how far off each is.
std::array<AkDiscrepancy, 4> ak_fair_sampling_check(const SinglesTable& singles,
                                                    const EfficiencyRatios& ratios);

}  // namespace epr

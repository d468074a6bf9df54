#pragma once

// Local detection-delay model: per-(setting, result) delay distributions on
// a shared time grid, fitted so the predicted density of coincidence time
// differences matches the observed one.
//
// Predicted density per cell is the discrete cross-correlation
// f(d) = sum_t gA(t) gB(t + d); the estimate adds the accidental floor,
// C_est = W_T * f + W_F / (window bins). Fitting alternates exact L1
// linear programs: all four of one side's distributions solve against the
// other side's fixed ones, then sides swap. Distribution mass sits at
// strictly positive delays (bin b covers (b*width, (b+1)*width] plus the
// grid origin) and is treated as a point mass at the bin's right edge.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "epr/types.hpp"

namespace epr {

struct DelayGrid {
  std::int64_t bin_ps = 500;
  int bins = 256;
  std::int64_t origin_ps = 0;

  std::int64_t right_edge(int b) const {
    return origin_ps + static_cast<std::int64_t>(b + 1) * bin_ps;
  }
  friend bool operator==(const DelayGrid&, const DelayGrid&) = default;
};

struct DelayModel {
  DelayGrid grid;
  std::array<std::vector<double>, 4> g_alice;  // index s*2 + r
  std::array<std::vector<double>, 4> g_bob;

  static DelayModel zeros(const DelayGrid& grid);
  // Throws DataError unless every distribution is non-negative and sums to
  // 1 within 1e-9 on the grid.
  void validate() const;
};

enum class Provenance { observed, predicted, estimated };

// Density of dt = t_B - t_A over grid-difference lattice points
// d in [-(n-1), n-1], dt = d * bin.
struct PredictedDensity {
  std::int64_t bin_ps = 0;
  int d_lo = 0;
  std::vector<double> f;

  double at(int d) const {
    const int i = d - d_lo;
    return (i >= 0 && i < static_cast<int>(f.size())) ? f[static_cast<std::size_t>(i)] : 0.0;
  }
  double total() const;
};

PredictedDensity predict_dt_density(const DelayModel& model, int s_a, int s_b, int r_a,
                                    int r_b);

// Sixteen per-cell histograms of dt over the window, bin width bin_ps,
// bins [u + j*bin, u + (j+1)*bin) with dt = v clamped into the last bin so
// the totals match the inclusive-window cell counts.
struct DtDensitySet {
  WindowSpec window;
  std::int64_t bin_ps = 0;
  Provenance provenance = Provenance::observed;
  std::array<std::vector<double>, 16> hist;

  std::size_t bins() const { return hist[0].size(); }
  double cell_total(std::size_t cell) const;
};

DtDensitySet observed_dt_densities(const DetectionLog& log_a, const DetectionLog& log_b,
                                   const WindowSpec& window, std::int64_t bin_ps);

// C_est over the window bins for one cell: w_true * (f binned into the
// window lattice) + w_false spread uniformly per bin.
std::vector<double> estimate_density(const PredictedDensity& f, double w_true_cell,
                                     double w_false_cell, const WindowSpec& window);

struct FitOptions {
  int max_outer_iterations = 200;
  double convergence_tol = 1e-6;   // max absolute distribution change
  double tv_penalty = 0.0;         // optional total-variation smoothing weight
  bool coupled_side_lp = false;    // solve a side's four LPs as one block LP
};

struct FitReport {
  double objective = 0.0;               // sum over cells and bins of |C_est - C_obs|
  int iterations = 0;                   // outer iterations executed
  bool converged = false;
  std::vector<double> objective_trace;  // after every half-step
  Cell16 per_cell_l1{};
  Cell16 total_mismatch{};              // sum(observed) - (W_T + W_F) per cell
  int gauge_peak_bin = 0;               // peak bin of fitted gA(.|0,0) before shifting
  int gauge_applied_bins = 0;           // lossless left shift actually applied
  std::size_t lp_pivots = 0;
};

struct DelayFit {
  DelayModel model;
  FitReport report;
};

// Alternating minimization. Default initialization puts a point mass at
// the grid bin containing the window's shift delta for every Alice
// distribution. Non-convergence at the iteration cap returns the
// best-so-far model with converged = false.
DelayFit fit_delay_model(const DtDensitySet& observed, const Cell16& w_true,
                         const Cell16& w_false, const DelayGrid& grid,
                         std::optional<DelayModel> init = {}, const FitOptions& options = {});

}  // namespace epr

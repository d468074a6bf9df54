#include "epr/delay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "epr/kernels.hpp"
#include "epr/lp.hpp"

namespace epr {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if (a % b != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

int cell_sa(std::size_t c) { return static_cast<int>((c >> 3) & 1); }
int cell_sb(std::size_t c) { return static_cast<int>((c >> 2) & 1); }
int cell_ra(std::size_t c) { return static_cast<int>((c >> 1) & 1); }
int cell_rb(std::size_t c) { return static_cast<int>(c & 1); }

// Grid-difference lattice points d (dt = d * bin) falling inside the
// inclusive window, grouped by the window bin they land in. dt = v lands in
// the last bin, mirroring the observed-histogram clamp.
std::vector<std::vector<int>> window_lattice(const WindowSpec& window, std::int64_t bin_ps) {
  const std::int64_t u = window.u_ps();
  const std::int64_t v = window.v_ps();
  const auto bins = static_cast<std::size_t>((v - u) / bin_ps);
  std::vector<std::vector<int>> lattice(bins);
  if (bins == 0) return lattice;
  for (std::int64_t d = ceil_div(u, bin_ps); d * bin_ps <= v; ++d) {
    auto j = static_cast<std::size_t>(floor_div(d * bin_ps - u, bin_ps));
    if (j >= bins) j = bins - 1;
    lattice[j].push_back(static_cast<int>(d));
  }
  return lattice;
}

void check_window_bins(const WindowSpec& window, std::int64_t bin_ps) {
  if (bin_ps <= 0) throw DataError("dt bin width must be positive");
  if ((window.v_ps() - window.u_ps()) % bin_ps != 0) {
    throw DataError("window width must be an integer multiple of the dt bin width");
  }
  if (window.v_ps() == window.u_ps()) throw DataError("empty dt window");
}

struct SideSolveResult {
  std::array<std::vector<double>, 4> dists;
  std::size_t pivots = 0;
};

// Solves one side's distributions against the other side's fixed ones as
// exact L1 linear programs. `solving_bob` selects which index of the cell
// picks the unknown distribution and how the cross-correlation offsets run.
SideSolveResult solve_side(bool solving_bob, const std::array<std::vector<double>, 4>& fixed,
                           const DtDensitySet& observed, const Cell16& w_true,
                           const Cell16& w_false,
                           const std::vector<std::vector<int>>& lattice, int n,
                           const FitOptions& options) {
  const auto bins = static_cast<std::size_t>(lattice.size());
  SideSolveResult result;

  std::vector<int> block_groups;
  std::vector<std::vector<int>> blocks;
  if (options.coupled_side_lp) {
    blocks.push_back({0, 1, 2, 3});
  } else {
    blocks = {{0}, {1}, {2}, {3}};
  }

  for (const auto& groups : blocks) {
    const std::size_t n_groups = groups.size();
    std::vector<std::size_t> cells;  // cells touching this block, in order
    for (int g : groups) {
      for (std::size_t c = 0; c < 16; ++c) {
        const int cg = solving_bob ? cell_sb(c) * 2 + cell_rb(c) : cell_sa(c) * 2 + cell_ra(c);
        if (cg == g) cells.push_back(c);
      }
    }
    const std::size_t res_rows = cells.size() * bins;
    const std::size_t tv_rows =
        options.tv_penalty > 0.0 ? n_groups * static_cast<std::size_t>(n - 1) : 0;
    const std::size_t rows = res_rows + n_groups + tv_rows;
    const std::size_t x_cols = n_groups * static_cast<std::size_t>(n);
    const std::size_t cols = x_cols + 2 * res_rows + 2 * tv_rows;

    LpProblem lp;
    lp.rows = rows;
    lp.cols = cols;
    lp.a.assign(rows * cols, 0.0);
    lp.b.assign(rows, 0.0);
    lp.c.assign(cols, 0.0);

    auto group_offset = [&](int g) {
      const auto it = std::find(groups.begin(), groups.end(), g);
      return static_cast<std::size_t>(it - groups.begin()) * static_cast<std::size_t>(n);
    };

    std::size_t row = 0;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      const std::size_t c = cells[ci];
      const int g = solving_bob ? cell_sb(c) * 2 + cell_rb(c) : cell_sa(c) * 2 + cell_ra(c);
      const int other = solving_bob ? cell_sa(c) * 2 + cell_ra(c) : cell_sb(c) * 2 + cell_rb(c);
      const std::vector<double>& fx = fixed[static_cast<std::size_t>(other)];
      const double wt = w_true[c];
      const double wf_per_bin = w_false[c] / static_cast<double>(bins);
      const std::size_t xoff = group_offset(g);
      for (std::size_t j = 0; j < bins; ++j, ++row) {
        double* arow = lp.a.data() + row * cols;
        if (wt > 0.0) {
          for (int d : lattice[j]) {
            // Coefficient of x[m]: wt * gA[m - d] when solving Bob,
            // wt * gB[m + d] when solving Alice.
            if (solving_bob) {
              const int m_lo = std::max(0, d);
              const int m_hi = std::min(n, n + d);
              for (int m = m_lo; m < m_hi; ++m) {
                arow[xoff + static_cast<std::size_t>(m)] +=
                    wt * fx[static_cast<std::size_t>(m - d)];
              }
            } else {
              const int m_lo = std::max(0, -d);
              const int m_hi = std::min(n, n - d);
              for (int m = m_lo; m < m_hi; ++m) {
                arow[xoff + static_cast<std::size_t>(m)] +=
                    wt * fx[static_cast<std::size_t>(m + d)];
              }
            }
          }
        }
        arow[x_cols + 2 * row] = -1.0;      // p
        arow[x_cols + 2 * row + 1] = 1.0;   // q
        lp.c[x_cols + 2 * row] = 1.0;
        lp.c[x_cols + 2 * row + 1] = 1.0;
        lp.b[row] = observed.hist[c][j] - wf_per_bin;
      }
    }
    for (std::size_t gi = 0; gi < n_groups; ++gi, ++row) {
      double* arow = lp.a.data() + row * cols;
      for (int m = 0; m < n; ++m) {
        arow[gi * static_cast<std::size_t>(n) + static_cast<std::size_t>(m)] = 1.0;
      }
      lp.b[row] = 1.0;
    }
    if (tv_rows > 0) {
      std::size_t slack = x_cols + 2 * res_rows;
      for (std::size_t gi = 0; gi < n_groups; ++gi) {
        const std::size_t xoff = gi * static_cast<std::size_t>(n);
        for (int m = 0; m + 1 < n; ++m, ++row) {
          double* arow = lp.a.data() + row * cols;
          arow[xoff + static_cast<std::size_t>(m + 1)] = 1.0;
          arow[xoff + static_cast<std::size_t>(m)] = -1.0;
          arow[slack] = -1.0;
          arow[slack + 1] = 1.0;
          lp.c[slack] = options.tv_penalty;
          lp.c[slack + 1] = options.tv_penalty;
          slack += 2;
        }
      }
    }

    LpResult sol = solve_lp(lp);
    result.pivots += sol.pivots;
    if (sol.status == LpStatus::infeasible || sol.status == LpStatus::unbounded) {
      throw SolverError("delay-fit LP unexpectedly infeasible or unbounded");
    }
    if (sol.status == LpStatus::iteration_limit) {
      throw SolverError("delay-fit LP hit its pivot limit");
    }

    for (std::size_t gi = 0; gi < n_groups; ++gi) {
      std::vector<double> dist(static_cast<std::size_t>(n));
      double sum = 0.0;
      for (int m = 0; m < n; ++m) {
        double v = sol.x[gi * static_cast<std::size_t>(n) + static_cast<std::size_t>(m)];
        if (v < 0.0) {
          if (v < -1e-9) throw SolverError("LP returned a negative distribution entry");
          v = 0.0;
        }
        dist[static_cast<std::size_t>(m)] = v;
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-8) {
        throw SolverError("LP distribution does not sum to 1");
      }
      for (double& v : dist) v /= sum;
      result.dists[static_cast<std::size_t>(groups[gi])] = std::move(dist);
    }
  }
  return result;
}

double model_objective(const DelayModel& model, const DtDensitySet& observed,
                       const Cell16& w_true, const Cell16& w_false, Cell16* per_cell) {
  double total = 0.0;
  for (std::size_t c = 0; c < 16; ++c) {
    const PredictedDensity f =
        predict_dt_density(model, cell_sa(c), cell_sb(c), cell_ra(c), cell_rb(c));
    const std::vector<double> est =
        estimate_density(f, w_true[c], w_false[c], observed.window);
    double cell_err = 0.0;
    for (std::size_t j = 0; j < est.size(); ++j) {
      cell_err += std::abs(est[j] - observed.hist[c][j]);
    }
    if (per_cell != nullptr) (*per_cell)[c] = cell_err;
    total += cell_err;
  }
  return total;
}

}  // namespace

DelayModel DelayModel::zeros(const DelayGrid& grid) {
  DelayModel m;
  m.grid = grid;
  for (auto& g : m.g_alice) g.assign(static_cast<std::size_t>(grid.bins), 0.0);
  for (auto& g : m.g_bob) g.assign(static_cast<std::size_t>(grid.bins), 0.0);
  return m;
}

void DelayModel::validate() const {
  if (grid.bin_ps <= 0 || grid.bins <= 0) throw DataError("bad delay grid");
  for (const auto* side : {&g_alice, &g_bob}) {
    for (const auto& g : *side) {
      if (g.size() != static_cast<std::size_t>(grid.bins)) {
        throw DataError("delay distribution length does not match the grid");
      }
      double sum = 0.0;
      for (double v : g) {
        if (v < 0.0) throw DataError("negative delay distribution entry");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw DataError("delay distribution does not sum to 1");
      }
    }
  }
}

double PredictedDensity::total() const {
  return std::accumulate(f.begin(), f.end(), 0.0);
}

PredictedDensity predict_dt_density(const DelayModel& model, int s_a, int s_b, int r_a,
                                    int r_b) {
  const auto& ga = model.g_alice[static_cast<std::size_t>(s_a * 2 + r_a)];
  const auto& gb = model.g_bob[static_cast<std::size_t>(s_b * 2 + r_b)];
  const int n = model.grid.bins;
  PredictedDensity out;
  out.bin_ps = model.grid.bin_ps;
  out.d_lo = -(n - 1);
  out.f.assign(static_cast<std::size_t>(2 * n - 1), 0.0);
  for (int d = -(n - 1); d <= n - 1; ++d) {
    const std::size_t len = static_cast<std::size_t>(n - std::abs(d));
    const double* x = d >= 0 ? ga.data() : ga.data() - d;
    const double* y = d >= 0 ? gb.data() + d : gb.data();
    out.f[static_cast<std::size_t>(d - out.d_lo)] = kernels::dot(x, y, len);
  }
  return out;
}

double DtDensitySet::cell_total(std::size_t cell) const {
  return std::accumulate(hist[cell].begin(), hist[cell].end(), 0.0);
}

DtDensitySet observed_dt_densities(const DetectionLog& log_a, const DetectionLog& log_b,
                                   const WindowSpec& window, std::int64_t bin_ps) {
  check_window_bins(window, bin_ps);
  DtDensitySet set;
  set.window = window;
  set.bin_ps = bin_ps;
  set.provenance = Provenance::observed;
  const auto bins = static_cast<std::size_t>((window.v_ps() - window.u_ps()) / bin_ps);
  for (auto& h : set.hist) h.assign(bins, 0.0);

  const auto& a = log_a.detections;
  const auto& b = log_b.detections;
  const std::int64_t u = window.u_ps();
  const std::int64_t v = window.v_ps();
  std::size_t l_lo = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const std::int64_t lo = a[k].time_ps + u;
    const std::int64_t hi = a[k].time_ps + v;
    while (l_lo < b.size() && b[l_lo].time_ps < lo) ++l_lo;
    for (std::size_t l = l_lo; l < b.size() && b[l].time_ps <= hi; ++l) {
      const std::int64_t dt = b[l].time_ps - a[k].time_ps;
      auto j = static_cast<std::size_t>((dt - u) / bin_ps);
      if (j >= bins) j = bins - 1;  // dt == v
      const auto cell = CellTable::index(a[k].setting, b[l].setting, a[k].result,
                                         b[l].result);
      set.hist[cell][j] += 1.0;
    }
  }
  return set;
}

std::vector<double> estimate_density(const PredictedDensity& f, double w_true_cell,
                                     double w_false_cell, const WindowSpec& window) {
  check_window_bins(window, f.bin_ps);
  const auto lattice = window_lattice(window, f.bin_ps);
  std::vector<double> est(lattice.size());
  const double wf_per_bin = w_false_cell / static_cast<double>(lattice.size());
  for (std::size_t j = 0; j < lattice.size(); ++j) {
    double mass = 0.0;
    for (int d : lattice[j]) mass += f.at(d);
    est[j] = w_true_cell * mass + wf_per_bin;
  }
  return est;
}

DelayFit fit_delay_model(const DtDensitySet& observed, const Cell16& w_true,
                         const Cell16& w_false, const DelayGrid& grid,
                         std::optional<DelayModel> init, const FitOptions& options) {
  check_window_bins(observed.window, grid.bin_ps);
  if (observed.bin_ps != grid.bin_ps) {
    throw DataError("observed dt bin width must match the delay grid");
  }
  const int n = grid.bins;
  const auto lattice = window_lattice(observed.window, grid.bin_ps);
  const auto bins = lattice.size();
  if (bins != observed.bins()) throw DataError("observed histogram bin count mismatch");

  DelayFit fit;
  fit.model = DelayModel::zeros(grid);
  if (init.has_value()) {
    init->validate();
    if (!(init->grid == grid)) throw DataError("init model grid mismatch");
    fit.model = *init;
  } else {
    // Single narrow peak at the bin containing the window's delta.
    const std::int64_t delta = observed.window.delta_ps();
    std::int64_t b = ceil_div(delta - grid.origin_ps, grid.bin_ps) - 1;
    b = std::clamp<std::int64_t>(b, 0, n - 1);
    for (auto& g : fit.model.g_alice) g[static_cast<std::size_t>(b)] = 1.0;
    for (auto& g : fit.model.g_bob) g[static_cast<std::size_t>(b)] = 1.0;
  }

  for (std::size_t c = 0; c < 16; ++c) {
    fit.report.total_mismatch[c] = observed.cell_total(c) - (w_true[c] + w_false[c]);
  }

  double objective = model_objective(fit.model, observed, w_true, w_false, nullptr);
  fit.report.objective_trace.push_back(objective);

  auto assert_non_increasing = [&](double next, const char* step) {
    if (next > objective + 1e-7 * (1.0 + std::abs(objective))) {
      throw SolverError(std::string("objective increased during ") + step +
                        " half-step: " + std::to_string(objective) + " -> " +
                        std::to_string(next));
    }
  };

  std::array<std::vector<double>, 4> prev_a = fit.model.g_alice;
  std::array<std::vector<double>, 4> prev_b = fit.model.g_bob;
  for (int iter = 1; iter <= options.max_outer_iterations; ++iter) {
    fit.report.iterations = iter;

    SideSolveResult bob = solve_side(true, fit.model.g_alice, observed, w_true, w_false,
                                     lattice, n, options);
    fit.model.g_bob = bob.dists;
    fit.report.lp_pivots += bob.pivots;
    double after_bob = model_objective(fit.model, observed, w_true, w_false, nullptr);
    assert_non_increasing(after_bob, "Bob");
    objective = after_bob;
    fit.report.objective_trace.push_back(objective);

    SideSolveResult alice = solve_side(false, fit.model.g_bob, observed, w_true, w_false,
                                       lattice, n, options);
    fit.model.g_alice = alice.dists;
    fit.report.lp_pivots += alice.pivots;
    double after_alice = model_objective(fit.model, observed, w_true, w_false, nullptr);
    assert_non_increasing(after_alice, "Alice");
    objective = after_alice;
    fit.report.objective_trace.push_back(objective);

    double change = 0.0;
    for (std::size_t g = 0; g < 4; ++g) {
      for (int m = 0; m < n; ++m) {
        change = std::max(change, std::abs(fit.model.g_alice[g][static_cast<std::size_t>(m)] -
                                           prev_a[g][static_cast<std::size_t>(m)]));
        change = std::max(change, std::abs(fit.model.g_bob[g][static_cast<std::size_t>(m)] -
                                           prev_b[g][static_cast<std::size_t>(m)]));
      }
    }
    prev_a = fit.model.g_alice;
    prev_b = fit.model.g_bob;
    if (change < options.convergence_tol) {
      fit.report.converged = true;
      break;
    }
  }

  fit.report.objective = model_objective(fit.model, observed, w_true, w_false,
                                         &fit.report.per_cell_l1);

  // Gauge: the model is identifiable only up to a common shift, but mass
  // must stay at t > 0, so shift left only as far as every distribution's
  // support allows.
  const auto& peak_dist = fit.model.g_alice[0];
  fit.report.gauge_peak_bin = static_cast<int>(
      std::max_element(peak_dist.begin(), peak_dist.end()) - peak_dist.begin());
  int max_shift = n;
  for (const auto* side : {&fit.model.g_alice, &fit.model.g_bob}) {
    for (const auto& g : *side) {
      int first = n;
      for (int m = 0; m < n; ++m) {
        if (g[static_cast<std::size_t>(m)] != 0.0) {
          first = m;
          break;
        }
      }
      max_shift = std::min(max_shift, first);
    }
  }
  const int shift = std::min(fit.report.gauge_peak_bin, max_shift);
  if (shift > 0) {
    for (auto* side : {&fit.model.g_alice, &fit.model.g_bob}) {
      for (auto& g : *side) {
        std::rotate(g.begin(), g.begin() + shift, g.end());
        std::fill(g.end() - shift, g.end(), 0.0);
      }
    }
    fit.report.gauge_applied_bins = shift;
  }
  return fit;
}

}  // namespace epr

#pragma once

// Diagonal-strip histogram of detection-time differences t_B - t_A, the
// Poisson false-positive (accidental) model, its goodness-of-fit test, and
// the excess-range scan used to locate the coincidence peak and suggest a
// detection window.

#include <cstdint>
#include <optional>
#include <vector>

#include "epr/types.hpp"

namespace epr {

// Half-open strips [lo + i*h, lo + (i+1)*h) so the strips partition the
// range and totals reconcile; the paper's closed strips overlap at edges
// below measurement resolution.
struct StripHistogram {
  std::int64_t strip_ps = 0;
  std::int64_t lo_ps = 0;
  std::int64_t hi_ps = 0;
  std::vector<std::uint64_t> counts;

  std::size_t strips() const { return counts.size(); }
  std::int64_t strip_lo(std::size_t i) const {
    return lo_ps + static_cast<std::int64_t>(i) * strip_ps;
  }
  std::uint64_t total() const;
};

struct FalsePositiveModel {
  double rate_per_ns = 0.0;  // N_A * N_B / T, T in ns
  std::int64_t span_ps = 0;
  std::uint64_t n_a = 0;
  std::uint64_t n_b = 0;

  double per_strip_mean(std::int64_t strip_ps) const {
    return rate_per_ns * ps_to_ns(strip_ps);
  }
  double expected_in(std::int64_t width_ps) const {
    return rate_per_ns * ps_to_ns(width_ps);
  }
};

struct ExcessRange {
  std::int64_t low_edge_ps = 0;
  std::int64_t high_edge_ps = 0;  // exclusive (strip grid)
  std::uint64_t observed = 0;
  double expected_fp = 0.0;
  double z_score = 0.0;  // (observed - expected) / sqrt(expected)

  std::int64_t width_ps() const { return high_edge_ps - low_edge_ps; }
};

StripHistogram build_strip_histogram(const DetectionLog& log_a, const DetectionLog& log_b,
                                     std::int64_t strip_ps, std::int64_t lo_ps,
                                     std::int64_t hi_ps);

// T defaults to max(duration_A, duration_B) when not supplied.
FalsePositiveModel fit_false_positive_model(const DetectionLog& log_a,
                                            const DetectionLog& log_b,
                                            std::optional<std::int64_t> span_ps = {});

struct DispersionReport {
  std::size_t included_strips = 0;
  double mean = 0.0;             // model mean per strip
  double sample_mean = 0.0;
  double chi2 = 0.0;
  double dof = 0.0;
  double chi2_p_value = 1.0;
  double dispersion_index = 0.0;  // sample variance / model mean
  double dispersion_z = 0.0;      // normal approx of (n-1)*index ~ chi2(n-1)
  double lag1_autocorr = 0.0;
  double lag1_z = 0.0;
  bool underpowered = false;      // fewer than 30 included strips
  double alpha = 0.01;
  bool poisson_consistent = false;  // chi2_p_value >= alpha
};

// Chi-square GOF against Poisson(per-strip mean), index of dispersion and
// lag-1 autocorrelation of strip counts, with the listed [lo, hi) ps ranges
// (the coincidence peak and any excess ranges) excluded.
DispersionReport poisson_dispersion_test(
    const StripHistogram& hist, const std::vector<std::pair<std::int64_t, std::int64_t>>& exclude,
    const FalsePositiveModel& model, double alpha = 0.01);

// Scan for ranges whose counts exceed the accidental model. Detection uses
// exact Poisson tails on dyadic tilings of min_run * 2^j strips (two
// offsets per scale), Bonferroni-corrected over the whole scan family, with
// family-wise alpha = normal_upper_tail(z_threshold); hits expand outward
// while neighboring strips stay above the expected mean and then merge.
// Reported z is (obs - exp)/sqrt(exp) as in the tables.
std::vector<ExcessRange> find_excess_ranges(const StripHistogram& hist,
                                            const FalsePositiveModel& model,
                                            double z_threshold = 5.0, int min_run = 2);

struct WindowSuggestion {
  WindowSpec window;              // the maximal excess range around the peak
  std::int64_t delta_ps = 0;      // excess-weighted centroid of the range
  ExcessRange range;
};

// Throws DataError when no excess range exists (background-only data).
WindowSuggestion suggest_window(const StripHistogram& hist, const FalsePositiveModel& model,
                                double z_threshold = 5.0, int min_run = 2);

}  // namespace epr

#include "epr/strips.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epr/kernels.hpp"
#include "epr/stats.hpp"

namespace epr {
namespace {

// Collects Bob times in [t_A + lo, t_A + hi) per Alice event and bins the
// differences in blocks, so the inner arithmetic runs through the SIMD
// kernel.
void bin_pairs(const DetectionLog& log_a, const DetectionLog& log_b, std::int64_t lo_ps,
               std::int64_t hi_ps, std::int64_t strip_ps, std::vector<std::uint64_t>& counts) {
  const auto& a = log_a.detections;
  const auto& b = log_b.detections;
  std::vector<std::int64_t> block;
  block.reserve(1024);
  std::size_t l_lo = 0, l_hi = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const std::int64_t t = a[k].time_ps;
    while (l_lo < b.size() && b[l_lo].time_ps < t + lo_ps) ++l_lo;
    if (l_hi < l_lo) l_hi = l_lo;
    while (l_hi < b.size() && b[l_hi].time_ps < t + hi_ps) ++l_hi;
    if (l_lo == l_hi) continue;
    block.clear();
    for (std::size_t l = l_lo; l < l_hi; ++l) block.push_back(b[l].time_ps);
    kernels::bin_diffs(block.data(), block.size(), t + lo_ps, strip_ps, counts.data());
  }
}

}  // namespace

std::uint64_t StripHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

StripHistogram build_strip_histogram(const DetectionLog& log_a, const DetectionLog& log_b,
                                     std::int64_t strip_ps, std::int64_t lo_ps,
                                     std::int64_t hi_ps) {
  if (strip_ps <= 0) throw DataError("strip width must be positive");
  if (hi_ps <= lo_ps) throw DataError("strip range must be non-empty");
  if ((hi_ps - lo_ps) % strip_ps != 0) {
    throw DataError("strip range must be an integer multiple of the strip width");
  }
  StripHistogram hist;
  hist.strip_ps = strip_ps;
  hist.lo_ps = lo_ps;
  hist.hi_ps = hi_ps;
  hist.counts.assign(static_cast<std::size_t>((hi_ps - lo_ps) / strip_ps), 0);
  bin_pairs(log_a, log_b, lo_ps, hi_ps, strip_ps, hist.counts);
  return hist;
}

FalsePositiveModel fit_false_positive_model(const DetectionLog& log_a,
                                            const DetectionLog& log_b,
                                            std::optional<std::int64_t> span_ps) {
  FalsePositiveModel m;
  m.n_a = log_a.size();
  m.n_b = log_b.size();
  m.span_ps = span_ps.value_or(std::max(log_a.duration_ps, log_b.duration_ps));
  if (m.span_ps <= 0) throw DataError("experiment span must be positive");
  m.rate_per_ns = static_cast<double>(m.n_a) * static_cast<double>(m.n_b) /
                  ps_to_ns(m.span_ps);
  return m;
}

DispersionReport poisson_dispersion_test(
    const StripHistogram& hist, const std::vector<std::pair<std::int64_t, std::int64_t>>& exclude,
    const FalsePositiveModel& model, double alpha) {
  DispersionReport rep;
  rep.alpha = alpha;
  rep.mean = model.per_strip_mean(hist.strip_ps);

  std::vector<bool> included(hist.strips(), true);
  for (const auto& [lo, hi] : exclude) {
    for (std::size_t i = 0; i < hist.strips(); ++i) {
      const std::int64_t s_lo = hist.strip_lo(i);
      const std::int64_t s_hi = s_lo + hist.strip_ps;
      if (s_lo < hi && s_hi > lo) included[i] = false;
    }
  }

  std::vector<std::uint64_t> counts;
  counts.reserve(hist.strips());
  for (std::size_t i = 0; i < hist.strips(); ++i) {
    if (included[i]) counts.push_back(hist.counts[i]);
  }
  rep.included_strips = counts.size();
  rep.underpowered = counts.size() < 30;
  if (counts.empty()) return rep;

  const double n = static_cast<double>(counts.size());
  double sum = 0.0;
  for (auto c : counts) sum += static_cast<double>(c);
  rep.sample_mean = sum / n;
  double ss = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - rep.sample_mean;
    ss += d * d;
  }
  const double sample_var = counts.size() > 1 ? ss / (n - 1.0) : 0.0;
  rep.dispersion_index = rep.mean > 0.0 ? sample_var / rep.mean : 0.0;
  if (counts.size() > 1) {
    rep.dispersion_z = ((n - 1.0) * rep.dispersion_index - (n - 1.0)) /
                       std::sqrt(2.0 * (n - 1.0));
  }

  auto gof = stats::poisson_chi_square_gof(counts, rep.mean);
  rep.chi2 = gof.chi2;
  rep.dof = gof.dof;
  rep.chi2_p_value = gof.p_value;
  rep.poisson_consistent = rep.chi2_p_value >= alpha;

  // Lag-1 autocorrelation over adjacent included strips only.
  std::size_t pairs = 0;
  double num = 0.0;
  for (std::size_t i = 0; i + 1 < hist.strips(); ++i) {
    if (!included[i] || !included[i + 1]) continue;
    num += (static_cast<double>(hist.counts[i]) - rep.sample_mean) *
           (static_cast<double>(hist.counts[i + 1]) - rep.sample_mean);
    ++pairs;
  }
  if (pairs > 0 && ss > 0.0) {
    rep.lag1_autocorr = (num / static_cast<double>(pairs)) / (ss / (n - 1.0));
    rep.lag1_z = rep.lag1_autocorr * std::sqrt(static_cast<double>(pairs));
  }
  return rep;
}

std::vector<ExcessRange> find_excess_ranges(const StripHistogram& hist,
                                            const FalsePositiveModel& model,
                                            double z_threshold, int min_run) {
  if (z_threshold <= 0.0) throw DataError("z threshold must be positive");
  if (min_run < 1) throw DataError("min_run must be at least 1");
  const std::size_t n = hist.strips();
  const double strip_mean = model.per_strip_mean(hist.strip_ps);
  std::vector<ExcessRange> out;
  if (n == 0 || strip_mean <= 0.0) return out;

  // Prefix sums for O(1) tile aggregation.
  std::vector<std::uint64_t> prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + hist.counts[i];
  auto tile_sum = [&](std::size_t i, std::size_t len) {
    return prefix[std::min(n, i + len)] - prefix[i];
  };

  // Dyadic tiling scan: scales min_run * 2^j, two offsets per scale.
  const std::size_t max_scale = std::min<std::size_t>(n, 512);
  auto for_each_tile = [&](auto&& fn) {
    for (std::size_t len = static_cast<std::size_t>(min_run); len <= max_scale; len *= 2) {
      const std::size_t n_offsets = len >= 2 ? 2 : 1;
      for (std::size_t o = 0; o < n_offsets; ++o) {
        for (std::size_t i = o * (len / 2); i < n; i += len) {
          fn(i, std::min(n, i + len));
        }
      }
    }
  };

  // Family size first, then the Bonferroni-corrected exact Poisson
  // criterion per tile.
  std::size_t n_tests = 0;
  for_each_tile([&](std::size_t, std::size_t) { ++n_tests; });
  if (n_tests == 0) return out;
  const double family_alpha = stats::normal_upper_tail(z_threshold);
  const double per_test_alpha = family_alpha / static_cast<double>(n_tests);

  std::vector<std::pair<std::size_t, std::size_t>> hits;  // [begin, end) strips
  for_each_tile([&](std::size_t begin, std::size_t end) {
    const std::uint64_t obs = tile_sum(begin, end - begin);
    if (obs == 0) return;
    const double mean = strip_mean * static_cast<double>(end - begin);
    if (stats::poisson_upper_tail(obs, mean) <= per_test_alpha) {
      hits.emplace_back(begin, end);
    }
  });
  if (hits.empty()) return out;

  // Merge overlapping hits, then grow each region while neighbors sit
  // strictly above the expected strip mean.
  std::sort(hits.begin(), hits.end());
  std::vector<std::pair<std::size_t, std::size_t>> regions;
  for (auto [b, e] : hits) {
    if (!regions.empty() && b <= regions.back().second) {
      regions.back().second = std::max(regions.back().second, e);
    } else {
      regions.emplace_back(b, e);
    }
  }
  for (auto& [b, e] : regions) {
    while (b > 0 && static_cast<double>(hist.counts[b - 1]) > strip_mean) --b;
    while (e < n && static_cast<double>(hist.counts[e]) > strip_mean) ++e;
  }
  std::vector<std::pair<std::size_t, std::size_t>> merged;
  for (auto [b, e] : regions) {
    if (!merged.empty() && b <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, e);
    } else {
      merged.emplace_back(b, e);
    }
  }

  for (auto [b, e] : merged) {
    ExcessRange r;
    r.low_edge_ps = hist.strip_lo(b);
    r.high_edge_ps = hist.strip_lo(e);
    r.observed = tile_sum(b, e - b);
    r.expected_fp = model.expected_in(r.width_ps());
    r.z_score = (static_cast<double>(r.observed) - r.expected_fp) / std::sqrt(r.expected_fp);
    out.push_back(r);
  }
  return out;
}

WindowSuggestion suggest_window(const StripHistogram& hist, const FalsePositiveModel& model,
                                double z_threshold, int min_run) {
  auto ranges = find_excess_ranges(hist, model, z_threshold, min_run);
  if (ranges.empty()) {
    throw DataError("no excess range found: data are consistent with background only");
  }
  // The range containing the globally hottest strip.
  std::size_t peak =
      static_cast<std::size_t>(std::max_element(hist.counts.begin(), hist.counts.end()) -
                               hist.counts.begin());
  const std::int64_t peak_lo = hist.strip_lo(peak);
  const ExcessRange* chosen = nullptr;
  for (const auto& r : ranges) {
    if (r.low_edge_ps <= peak_lo && peak_lo < r.high_edge_ps) {
      chosen = &r;
      break;
    }
  }
  if (chosen == nullptr) {
    throw DataError("peak strip lies outside every excess range");
  }

  WindowSuggestion s;
  s.range = *chosen;
  s.window = WindowSpec::from_edges(chosen->low_edge_ps, chosen->high_edge_ps);

  const double strip_mean = model.per_strip_mean(hist.strip_ps);
  double weight_sum = 0.0;
  double centroid = 0.0;
  for (std::int64_t lo = chosen->low_edge_ps; lo < chosen->high_edge_ps; lo += hist.strip_ps) {
    const auto i = static_cast<std::size_t>((lo - hist.lo_ps) / hist.strip_ps);
    const double excess = static_cast<double>(hist.counts[i]) - strip_mean;
    if (excess <= 0.0) continue;
    weight_sum += excess;
    centroid += excess * (static_cast<double>(lo) + 0.5 * static_cast<double>(hist.strip_ps));
  }
  s.delta_ps = weight_sum > 0.0 ? static_cast<std::int64_t>(std::llround(centroid / weight_sum))
                                : (chosen->low_edge_ps + chosen->high_edge_ps) / 2;
  return s;
}

}  // namespace epr

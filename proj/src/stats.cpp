#include "epr/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

namespace epr::stats {

double poisson_pmf(std::uint64_t k, double mean) {
  if (mean <= 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(static_cast<double>(k) * std::log(mean) - mean -
                  std::lgamma(static_cast<double>(k) + 1.0));
}

double poisson_upper_tail(std::uint64_t k, double mean) {
  if (k == 0) return 1.0;
  if (mean <= 0.0) return 0.0;
  // P(X >= k) = gamma_p(k, mean).
  return boost::math::gamma_p(static_cast<double>(k), mean);
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double chi_square_upper_tail(double chi2, double dof) {
  if (chi2 <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, chi2 / 2.0);
}

ChiSquareGof poisson_chi_square_gof(const std::vector<std::uint64_t>& counts, double mean,
                                    double min_expected) {
  ChiSquareGof gof;
  const std::size_t n = counts.size();
  if (n == 0) return gof;

  std::uint64_t k_max = *std::max_element(counts.begin(), counts.end());
  // Outcome histogram over k = 0..k_max, with everything above k_max pooled
  // into the top group via the complementary expectation.
  std::vector<std::uint64_t> observed(k_max + 1, 0);
  for (std::uint64_t c : counts) observed[c] += 1;
  std::vector<double> expected(k_max + 1, 0.0);
  double cumulative = 0.0;
  for (std::uint64_t k = 0; k <= k_max; ++k) {
    double p = poisson_pmf(k, mean);
    expected[k] = p * static_cast<double>(n);
    cumulative += p;
  }
  double tail_expected = std::max(0.0, 1.0 - cumulative) * static_cast<double>(n);

  // Pool from the low side, then from the high side (tail mass included in
  // the final group), so every group expectation is at least min_expected.
  std::vector<double> group_obs, group_exp;
  double o = 0.0, e = 0.0;
  for (std::uint64_t k = 0; k <= k_max; ++k) {
    o += static_cast<double>(observed[k]);
    e += expected[k];
    if (e >= min_expected) {
      group_obs.push_back(o);
      group_exp.push_back(e);
      o = 0.0;
      e = 0.0;
    }
  }
  o += 0.0;
  e += tail_expected;
  if (!group_obs.empty() && (e > 0.0 || o > 0.0)) {
    // Leftover low-expectation remainder merges into the last group.
    group_obs.back() += o;
    group_exp.back() += e;
  } else if (e > 0.0 || o > 0.0) {
    group_obs.push_back(o);
    group_exp.push_back(e);
  }

  gof.groups = group_obs.size();
  if (gof.groups < 2) {
    gof.dof = 0.0;
    gof.p_value = 1.0;
    return gof;
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < group_obs.size(); ++i) {
    const double diff = group_obs[i] - group_exp[i];
    chi2 += diff * diff / group_exp[i];
  }
  gof.chi2 = chi2;
  gof.dof = static_cast<double>(gof.groups - 1);
  gof.p_value = chi_square_upper_tail(chi2, gof.dof);
  return gof;
}

}  // namespace epr::stats

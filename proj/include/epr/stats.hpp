#pragma once

// Small statistics toolbox shared by the strip-histogram analysis.

#include <cstdint>
#include <vector>

namespace epr::stats {

double poisson_pmf(std::uint64_t k, double mean);

// P(X >= k) for X ~ Poisson(mean).
double poisson_upper_tail(std::uint64_t k, double mean);

// Upper tail of the standard normal, P(Z >= z).
double normal_upper_tail(double z);

// Upper tail of a chi-square distribution with dof degrees of freedom.
double chi_square_upper_tail(double chi2, double dof);

struct ChiSquareGof {
  double chi2 = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::size_t groups = 0;
};

// Goodness of fit of integer counts against Poisson(mean) with the mean
// fully specified by the model. Outcome bins are pooled from both tails
// until each group's expectation reaches min_expected.
ChiSquareGof poisson_chi_square_gof(const std::vector<std::uint64_t>& counts, double mean,
                                    double min_expected = 5.0);

}  // namespace epr::stats

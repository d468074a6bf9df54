#include "epr/kernels.hpp"

// Reference kernels. These definitions are the contract: the AVX2 variants
// must reproduce them bit for bit, so accumulation order matters here.

namespace epr::kernels::detail {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = y[i] + a * x[i];
  }
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += x[i] * y[i];
    s1 += x[i + 1] * y[i + 1];
    s2 += x[i + 2] * y[i + 2];
    s3 += x[i + 3] * y[i + 3];
  }
  double total = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) {
    total += x[i] * y[i];
  }
  return total;
}

void bin_diffs_scalar(const std::int64_t* v, std::size_t n, std::int64_t base,
                      std::int64_t h, std::uint64_t* counts) {
  for (std::size_t i = 0; i < n; ++i) {
    counts[(v[i] - base) / h] += 1;
  }
}

std::size_t min_index_scalar(const double* v, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

}  // namespace

const Ops scalar_ops = {axpy_scalar, dot_scalar, bin_diffs_scalar, min_index_scalar};

}  // namespace epr::kernels::detail

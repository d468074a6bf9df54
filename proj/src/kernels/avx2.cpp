#include "epr/kernels.hpp"

#if EPR_HAVE_AVX2_BUILD

#include <immintrin.h>

namespace epr::kernels::detail {
namespace {

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  // mul + add, not FMA: each lane rounds twice exactly like the reference.
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) {
    y[i] = y[i] + a * x[i];
  }
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  // Lane j holds accumulator s_j of the reference; combine in its order.
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    total += x[i] * y[i];
  }
  return total;
}

void bin_diffs_avx2(const std::int64_t* v, std::size_t n, std::int64_t base,
                    std::int64_t h, std::uint64_t* counts) {
  const __m256i vbase = _mm256_set1_epi64x(base);
  const double inv_h = 1.0 / static_cast<double>(h);
  const __m256d vinv = _mm256_set1_pd(inv_h);
  std::size_t i = 0;
  alignas(32) std::int64_t d[4];
  alignas(32) double q[4];
  for (; i + 4 <= n; i += 4) {
    __m256i vv = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v + i));
    __m256i vd = _mm256_sub_epi64(vv, vbase);
    _mm256_store_si256(reinterpret_cast<__m256i*>(d), vd);
    // int64 -> double by lane; differences fit in 53 bits by contract.
    __m256d fd = _mm256_set_pd(static_cast<double>(d[3]), static_cast<double>(d[2]),
                               static_cast<double>(d[1]), static_cast<double>(d[0]));
    _mm256_store_pd(q, _mm256_mul_pd(fd, vinv));
    for (int k = 0; k < 4; ++k) {
      std::int64_t idx = static_cast<std::int64_t>(q[k]);
      // The reciprocal multiply can be off by one at exact multiples.
      while ((idx + 1) * h <= d[k]) ++idx;
      while (idx * h > d[k]) --idx;
      counts[idx] += 1;
    }
  }
  for (; i < n; ++i) {
    counts[(v[i] - base) / h] += 1;
  }
}

std::size_t min_index_avx2(const double* v, std::size_t n) {
  if (n < 8) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (v[i] < v[best]) best = i;
    }
    return best;
  }
  __m256d vmin = _mm256_loadu_pd(v);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) {
    vmin = _mm256_min_pd(vmin, _mm256_loadu_pd(v + i));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vmin);
  double m = lanes[0];
  for (int k = 1; k < 4; ++k) {
    if (lanes[k] < m) m = lanes[k];
  }
  for (; i < n; ++i) {
    if (v[i] < m) m = v[i];
  }
  // First occurrence of the minimum, matching the reference tie-break.
  for (std::size_t j = 0; j < n; ++j) {
    if (v[j] == m) return j;
  }
  return 0;
}

}  // namespace

const Ops avx2_ops = {axpy_avx2, dot_avx2, bin_diffs_avx2, min_index_avx2};

}  // namespace epr::kernels::detail

#endif  // EPR_HAVE_AVX2_BUILD

#pragma once

// Data-parallel inner-loop kernels: scalar reference implementations plus
// AVX2 variants selected at runtime. Variants are bit-exact equivalents of
// the scalar reference (the reference defines the arithmetic, including
// accumulation order), so callers never observe which lane executed.
//
// Used by: the simplex tableau (axpy, min_index), the discrete
// cross-correlation (dot), and difference-histogram binning (bin_diffs).

#include <cstddef>
#include <cstdint>
#include <string>

namespace epr::kernels {

struct Ops {
  // y[i] += a * x[i]. Separate multiply and add (no FMA contraction), so
  // every lane rounds exactly like the scalar reference.
  void (*axpy)(double a, const double* x, double* y, std::size_t n);

  // Interleaved 4-accumulator dot product. Accumulator j sums terms
  // i = j (mod 4); the total is ((s0+s1) + (s2+s3)) plus a sequential tail.
  double (*dot)(const double* x, const double* y, std::size_t n);

  // counts[(v[i] - base) / h] += 1. Caller guarantees base <= v[i] and
  // (v[i] - base) / h < nbins for all i, h > 0.
  void (*bin_diffs)(const std::int64_t* v, std::size_t n, std::int64_t base,
                    std::int64_t h, std::uint64_t* counts);

  // Index of the first minimum element. n must be > 0 and values non-NaN.
  std::size_t (*min_index)(const double* v, std::size_t n);
};

namespace detail {
extern const Ops scalar_ops;
#if EPR_HAVE_AVX2_BUILD
extern const Ops avx2_ops;
#endif
}  // namespace detail

// Active implementation. Chosen once: AVX2 when the CPU supports it,
// scalar otherwise; the EPR_KERNELS environment variable ("scalar" or
// "avx2") overrides.
const Ops& active();
const char* active_name();

// Test hook: returns nullptr if the named variant is unavailable.
const Ops* variant(const std::string& name);

inline void axpy(double a, const double* x, double* y, std::size_t n) {
  active().axpy(a, x, y, n);
}
inline double dot(const double* x, const double* y, std::size_t n) {
  return active().dot(x, y, n);
}
inline void bin_diffs(const std::int64_t* v, std::size_t n, std::int64_t base,
                      std::int64_t h, std::uint64_t* counts) {
  active().bin_diffs(v, n, base, h, counts);
}
inline std::size_t min_index(const double* v, std::size_t n) {
  return active().min_index(v, n);
}

}  // namespace epr::kernels

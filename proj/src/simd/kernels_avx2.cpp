#include <cmath>

#include "mcache/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define MCACHE_HAVE_AVX2_KERNELS 1
#define MCACHE_AVX2 __attribute__((target("avx2")))
#endif

namespace mcache::simd::detail {

#ifdef MCACHE_HAVE_AVX2_KERNELS

namespace {

MCACHE_AVX2 inline __m256d wrap4(__m256d d, __m256d period, bool periodic) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  d = _mm256_andnot_pd(sign, d);
  return periodic ? _mm256_min_pd(d, _mm256_sub_pd(period, d)) : d;
}

inline double wrap1(double d, double period) {
  d = std::abs(d);
  return (period > 0.0 && d > period - d) ? period - d : d;
}

MCACHE_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

MCACHE_AVX2 void squared_distances(const double* xs, const double* ys, std::size_t n, double x0,
                                   double y0, double period, double* out) {
  const bool periodic = period > 0.0;
  const __m256d vx0 = _mm256_set1_pd(x0);
  const __m256d vy0 = _mm256_set1_pd(y0);
  const __m256d vp = _mm256_set1_pd(period);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = wrap4(_mm256_sub_pd(_mm256_loadu_pd(xs + i), vx0), vp, periodic);
    const __m256d dy = wrap4(_mm256_sub_pd(_mm256_loadu_pd(ys + i), vy0), vp, periodic);
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
  }
  for (; i < n; ++i) {
    const double dx = wrap1(xs[i] - x0, period);
    const double dy = wrap1(ys[i] - y0, period);
    out[i] = dx * dx + dy * dy;
  }
}

MCACHE_AVX2 double interference_sum(const double* d2, const double* fading, std::size_t n,
                                    double half_alpha) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  if (half_alpha == 2.0) {
    for (; i + 4 <= n; i += 4) {
      const __m256d d = _mm256_loadu_pd(d2 + i);
      acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_loadu_pd(fading + i), _mm256_mul_pd(d, d)));
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += fading[i] / (d2[i] * d2[i]);
    return total;
  }
  alignas(32) double gain[4];
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) gain[l] = std::pow(d2[i + l], -half_alpha);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(fading + i), _mm256_load_pd(gain)));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += fading[i] * std::pow(d2[i], -half_alpha);
  return total;
}

MCACHE_AVX2 bool any_within(const double* xs, const double* ys, std::size_t n, double x0,
                            double y0, double period, double r2) {
  const bool periodic = period > 0.0;
  const __m256d vx0 = _mm256_set1_pd(x0);
  const __m256d vy0 = _mm256_set1_pd(y0);
  const __m256d vp = _mm256_set1_pd(period);
  const __m256d vr2 = _mm256_set1_pd(r2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = wrap4(_mm256_sub_pd(_mm256_loadu_pd(xs + i), vx0), vp, periodic);
    const __m256d dy = wrap4(_mm256_sub_pd(_mm256_loadu_pd(ys + i), vy0), vp, periodic);
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    if (_mm256_movemask_pd(_mm256_cmp_pd(d2, vr2, _CMP_LT_OQ)) != 0) return true;
  }
  for (; i < n; ++i) {
    const double dx = wrap1(xs[i] - x0, period);
    const double dy = wrap1(ys[i] - y0, period);
    if (dx * dx + dy * dy < r2) return true;
  }
  return false;
}

MCACHE_AVX2 void poisson_binomial(const double* success, std::size_t n, double* pmf) {
  pmf[0] = 1.0;
  for (std::size_t j = 1; j <= n; ++j) pmf[j] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = success[i];
    const double s = 1.0 - r;
    const __m256d vr = _mm256_set1_pd(r);
    const __m256d vs = _mm256_set1_pd(s);
    // Top-down blocks: each block reads pmf[j-1..j+2] before any lower block
    // overwrites them.
    std::size_t j = i + 1;
    while (j >= 4) {
      const std::size_t lo = j - 3;
      const __m256d keep = _mm256_loadu_pd(pmf + lo);
      const __m256d shift = _mm256_loadu_pd(pmf + lo - 1);
      _mm256_storeu_pd(pmf + lo, _mm256_add_pd(_mm256_mul_pd(keep, vs), _mm256_mul_pd(shift, vr)));
      j -= 4;
    }
    for (; j >= 1; --j) pmf[j] = pmf[j] * s + pmf[j - 1] * r;
    pmf[0] = pmf[0] * s;
  }
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Isa::Avx2, &squared_distances, &interference_sum, &any_within,
                                 &poisson_binomial};
  return &table;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace mcache::simd::detail

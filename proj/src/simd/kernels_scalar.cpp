#include <cmath>

#include "mcache/simd/kernels.hpp"

namespace mcache::simd::detail {

namespace {

inline double wrapped(double d, double period) {
  d = std::abs(d);
  return (period > 0.0 && d > period - d) ? period - d : d;
}

void squared_distances(const double* xs, const double* ys, std::size_t n, double x0, double y0,
                       double period, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = wrapped(xs[i] - x0, period);
    const double dy = wrapped(ys[i] - y0, period);
    out[i] = dx * dx + dy * dy;
  }
}

double interference_sum(const double* d2, const double* fading, std::size_t n, double half_alpha) {
  double total = 0.0;
  if (half_alpha == 2.0) {
    for (std::size_t i = 0; i < n; ++i) total += fading[i] / (d2[i] * d2[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) total += fading[i] * std::pow(d2[i], -half_alpha);
  }
  return total;
}

bool any_within(const double* xs, const double* ys, std::size_t n, double x0, double y0,
                double period, double r2) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = wrapped(xs[i] - x0, period);
    const double dy = wrapped(ys[i] - y0, period);
    if (dx * dx + dy * dy < r2) return true;
  }
  return false;
}

void poisson_binomial(const double* success, std::size_t n, double* pmf) {
  pmf[0] = 1.0;
  for (std::size_t j = 1; j <= n; ++j) pmf[j] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = success[i];
    const double s = 1.0 - r;
    for (std::size_t j = i + 1; j >= 1; --j) pmf[j] = pmf[j] * s + pmf[j - 1] * r;
    pmf[0] = pmf[0] * s;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar, &squared_distances, &interference_sum, &any_within,
                                 &poisson_binomial};
  return table;
}

}  // namespace mcache::simd::detail

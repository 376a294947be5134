#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "mcache/simd/kernels.hpp"

namespace mcache::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  Isa isa = detected_isa();
  if (const char* env = std::getenv("MCACHE_SIMD")) {
    const std::string want(env);
    if (want == "scalar") isa = Isa::Scalar;
    else if (want == "avx2" && isa_supported(Isa::Avx2)) isa = Isa::Avx2;
  }
  return &kernels(isa);
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
      return detail::avx2_table() != nullptr && cpu_has_avx2();
  }
  return false;
}

Isa detected_isa() { return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return kernels().isa; }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("set_isa: " + std::string(isa_name(isa)) + " not supported");
  }
  active_slot().store(&kernels(isa));
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const KernelTable& kernels() { return *active_slot().load(std::memory_order_relaxed); }

const KernelTable& kernels(Isa isa) {
  if (isa == Isa::Avx2 && isa_supported(Isa::Avx2)) return *detail::avx2_table();
  if (isa == Isa::Avx2) throw std::invalid_argument("kernels: avx2 not supported");
  return detail::scalar_table();
}

void squared_distances(std::span<const double> xs, std::span<const double> ys, double x0,
                       double y0, double period, std::span<double> out) {
  if (ys.size() != xs.size() || out.size() < xs.size()) {
    throw std::invalid_argument("squared_distances: size mismatch");
  }
  kernels().squared_distances(xs.data(), ys.data(), xs.size(), x0, y0, period, out.data());
}

double interference_sum(std::span<const double> d2, std::span<const double> fading,
                        double half_alpha) {
  if (fading.size() != d2.size()) throw std::invalid_argument("interference_sum: size mismatch");
  return kernels().interference_sum(d2.data(), fading.data(), d2.size(), half_alpha);
}

bool any_within(std::span<const double> xs, std::span<const double> ys, double x0, double y0,
                double period, double r2) {
  if (ys.size() != xs.size()) throw std::invalid_argument("any_within: size mismatch");
  return kernels().any_within(xs.data(), ys.data(), xs.size(), x0, y0, period, r2);
}

void poisson_binomial(std::span<const double> success, std::span<double> pmf) {
  if (pmf.size() != success.size() + 1) {
    throw std::invalid_argument("poisson_binomial: pmf must have n + 1 entries");
  }
  kernels().poisson_binomial(success.data(), success.size(), pmf.data());
}

}  // namespace mcache::simd

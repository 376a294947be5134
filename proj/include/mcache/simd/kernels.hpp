#pragma once

// Data-parallel inner loops of the simulator and the load analysis.
//
// Every kernel has a portable scalar reference and an AVX2 variant; the
// variant is chosen once at startup from CPUID and can be overridden with
// MCACHE_SIMD=scalar|avx2 or set_isa(). The AVX2 code is compiled with a
// function-level target attribute, so the library runs on any x86-64 (and
// on non-x86 targets only the scalar table exists).
//
// squared_distances, any_within and poisson_binomial produce bit-identical
// results across variants (no fused multiply-add, same operation order).
// interference_sum reassociates the sum and agrees to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace mcache::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  // out[i] = dx^2 + dy^2, with minimum-image wrap when period > 0
  void (*squared_distances)(const double* xs, const double* ys, std::size_t n, double x0,
                            double y0, double period, double* out);
  // sum_i fading[i] * d2[i]^(-half_alpha); d2 = +inf contributes zero
  double (*interference_sum)(const double* d2, const double* fading, std::size_t n,
                             double half_alpha);
  // true iff some point lies strictly closer than sqrt(r2)
  bool (*any_within)(const double* xs, const double* ys, std::size_t n, double x0, double y0,
                     double period, double r2);
  // pmf[0..n] of the number of successes among n independent Bernoulli trials
  void (*poisson_binomial)(const double* success, std::size_t n, double* pmf);
};

bool isa_supported(Isa isa);
/// Best ISA supported by this CPU.
Isa detected_isa();
Isa active_isa();
/// Throws std::invalid_argument if the CPU lacks the ISA.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);

const KernelTable& kernels();
const KernelTable& kernels(Isa isa);

// Span front ends over the active table.

void squared_distances(std::span<const double> xs, std::span<const double> ys, double x0,
                       double y0, double period, std::span<double> out);
double interference_sum(std::span<const double> d2, std::span<const double> fading,
                        double half_alpha);
bool any_within(std::span<const double> xs, std::span<const double> ys, double x0, double y0,
                double period, double r2);
/// pmf.size() must be success.size() + 1.
void poisson_binomial(std::span<const double> success, std::span<double> pmf);

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
}  // namespace detail

}  // namespace mcache::simd

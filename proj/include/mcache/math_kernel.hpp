#pragma once

#include <vector>

#include "mcache/network.hpp"

namespace mcache {

/// B(x, y) = int_0^1 u^{x-1} (1-u)^{y-1} du. Throws std::domain_error unless x, y > 0.
double beta(double x, double y);

/// Complementary incomplete Beta, int_z^1 u^{x-1} (1-u)^{y-1} du, for 0 <= z <= 1.
double beta_comp_inc(double x, double y, double z);

/// Interference constants for a file load of k.
///
/// c2 captures interference from BSs that do not store the requested file,
/// c1 the net effect of caching the file at a fraction of the BSs. The
/// infinite-SNR success probability of a file cached with probability x is
/// x / (c2 + c1 x).
struct CConstants {
  int k = 1;
  double c1 = 1.0;
  double c2 = 0.0;
};

CConstants c_constants(int k, const NetworkConfig& cfg);

/// Value and derivative of f_k at one point, plus f_k(x)/x (finite at x = 0).
struct FkTerms {
  double value = 0.0;
  double derivative = 0.0;
  double ratio = 0.0;
};

/// Success probability of a file cached at a fraction x of the BSs when the
/// serving BS splits bandwidth among k files.
///
/// The integral over the serving distance is evaluated in the variable
/// t = pi * lambda_b * d^2, where the integrand becomes
///   exp(-(c2 + c1 x) t) * exp(-(2^{k tau/W} - 1) (t / (pi lambda_b))^{alpha/2} N0/P)
/// and f_k(x) = x * int_0^inf (...) dt. With infinite SNR the second factor
/// is one and the closed form x / (c2 + c1 x) is returned.
///
/// Objects are immutable after construction and safe to share across threads.
class CoverageKernel {
 public:
  /// Precomputes constants for loads 1..max_load (defaults to the cache size).
  explicit CoverageKernel(const NetworkConfig& cfg, int max_load = 0);

  int max_load() const { return static_cast<int>(constants_.size()); }
  const CConstants& constants(int k) const;

  double f(double x, int k) const;
  /// d f_k / dx, including x = 0 where it equals f_k(x)/x in the limit.
  double f_prime(double x, int k) const;
  FkTerms terms(double x, int k) const;

 private:
  // int_0^inf t^power exp(-a t - b t^{alpha/2}) dt for power in {0, 1}
  double laplace_moment(double a, double b, int power) const;
  double noise_coefficient(int k) const;

  NetworkConfig cfg_;
  std::vector<CConstants> constants_;
  std::vector<double> noise_coef_;
};

/// f_k(x) for 0 <= x <= 1. Returns 0 at x = 0.
double f_k(double x, int k, const NetworkConfig& cfg);

/// Analytical derivative of f_k. Throws std::domain_error for x <= 0.
double f_k_prime(double x, int k, const NetworkConfig& cfg);

}  // namespace mcache

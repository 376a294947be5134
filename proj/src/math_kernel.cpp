#include "mcache/math_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

namespace mcache {

namespace {

// Integrand bound at the truncation point, relative to exp(0).
constexpr double kTailExponent = 40.0;
constexpr double kQuadratureTol = 1e-13;
constexpr unsigned kMaxDepth = 20;

}  // namespace

double beta(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) throw std::domain_error("beta: arguments must be positive");
  if (x + y == 1.0) {
    // Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::numbers::pi / std::sin(std::numbers::pi * x);
  }
  return boost::math::beta(x, y);
}

double beta_comp_inc(double x, double y, double z) {
  if (!(x > 0.0) || !(y > 0.0)) {
    throw std::domain_error("beta_comp_inc: shape arguments must be positive");
  }
  if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("beta_comp_inc: z must lie in [0, 1]");
  if (z == 1.0) return 0.0;
  if (z == 0.0) return beta(x, y);
  return boost::math::betac(x, y, z);
}

CConstants c_constants(int k, const NetworkConfig& cfg) {
  if (k < 1) throw std::domain_error("c_constants: load must be at least 1");
  const double delta = 2.0 / cfg.path_loss;
  const double ratio = k * cfg.rate_ratio();
  const double sinr_threshold = std::exp2(ratio) - 1.0;
  const double scale = delta * std::pow(sinr_threshold, delta);
  const double full = beta(delta, 1.0 - delta);
  const double tail = beta_comp_inc(delta, 1.0 - delta, std::exp2(-ratio));
  CConstants c;
  c.k = k;
  c.c2 = scale * full;
  c.c1 = 1.0 + scale * tail - c.c2;
  return c;
}

CoverageKernel::CoverageKernel(const NetworkConfig& cfg, int max_load) : cfg_(cfg) {
  const int loads = max_load > 0 ? max_load : std::max(cfg.cache_size, 1);
  constants_.reserve(loads);
  noise_coef_.reserve(loads);
  for (int k = 1; k <= loads; ++k) {
    constants_.push_back(c_constants(k, cfg));
    noise_coef_.push_back(noise_coefficient(k));
  }
}

const CConstants& CoverageKernel::constants(int k) const {
  if (k < 1 || k > max_load()) throw std::out_of_range("CoverageKernel: load out of range");
  return constants_[k - 1];
}

double CoverageKernel::noise_coefficient(int k) const {
  if (cfg_.snr.is_infinite()) return 0.0;
  const double sinr_threshold = std::exp2(k * cfg_.rate_ratio()) - 1.0;
  const double area_scale = std::pow(std::numbers::pi * cfg_.bs_density, -0.5 * cfg_.path_loss);
  return sinr_threshold * area_scale * cfg_.snr.noise_to_power();
}

double CoverageKernel::laplace_moment(double a, double b, int power) const {
  if (b == 0.0) return power == 0 ? 1.0 / a : 1.0 / (a * a);
  const double half_alpha = 0.5 * cfg_.path_loss;
  double upper = std::pow(kTailExponent / b, 1.0 / half_alpha);
  if (a > 0.0) upper = std::min(upper, kTailExponent / a);
  auto integrand = [&](double t) {
    const double e = std::exp(-a * t - b * std::pow(t, half_alpha));
    return power == 0 ? e : t * e;
  };
  return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(integrand, 0.0, upper,
                                                                       kMaxDepth, kQuadratureTol);
}

FkTerms CoverageKernel::terms(double x, int k) const {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("f_k: x must lie in [0, 1]");
  const CConstants& c = constants(k);
  const double a = c.c2 + c.c1 * x;
  const double b = noise_coef_[k - 1];
  FkTerms out;
  out.ratio = laplace_moment(a, b, 0);
  out.value = x * out.ratio;
  const double first_moment = x == 0.0 ? 0.0 : laplace_moment(a, b, 1);
  out.derivative = out.ratio - c.c1 * x * first_moment;
  return out;
}

double CoverageKernel::f(double x, int k) const {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("f_k: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  const CConstants& c = constants(k);
  return x * laplace_moment(c.c2 + c.c1 * x, noise_coef_[k - 1], 0);
}

double CoverageKernel::f_prime(double x, int k) const { return terms(x, k).derivative; }

double f_k(double x, int k, const NetworkConfig& cfg) {
  return CoverageKernel(cfg, k).f(x, k);
}

double f_k_prime(double x, int k, const NetworkConfig& cfg) {
  if (!(x > 0.0)) throw std::domain_error("f_k_prime: x must be positive");
  return CoverageKernel(cfg, k).f_prime(x, k);
}

}  // namespace mcache

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "mcache/math_kernel.hpp"

using namespace mcache;
using std::numbers::pi;

namespace {

// Oracles: double-exponential quadrature of the defining integrals.
double beta_oracle(double x, double y, double lo = 0.0, double hi = 1.0) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double u) { return std::pow(u, x - 1) * std::pow(1 - u, y - 1); }, lo, hi);
}

NetworkConfig fig2(double snr_db) {
  NetworkConfig cfg;
  cfg.snr = std::isinf(snr_db) ? Snr::infinite() : Snr::from_db(snr_db);
  return cfg;
}

// c2 = int_0^inf dv / (1 + v^{alpha/2} / s),  c1 = 1 - int_0^1 dv / (1 + v^{alpha/2} / s)
CConstants c_oracle(int k, const NetworkConfig& cfg) {
  const double s = std::exp2(k * cfg.rate_ratio()) - 1.0;
  const double h = cfg.path_loss / 2;
  auto g = [&](double v) { return 1.0 / (1.0 + std::pow(v, h) / s); };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  const double head = ts.integrate(g, 0.0, 1.0);
  return {k, 1.0 - head, head + es.integrate(g, 1.0, std::numeric_limits<double>::infinity())};
}

// f_k(x) = x int_0^inf exp(-(c2 + c1 x) t - b t^{alpha/2}) dt with an independent integrator.
double f_oracle(double x, int k, const NetworkConfig& cfg) {
  const CConstants c = c_oracle(k, cfg);
  const double s = std::exp2(k * cfg.rate_ratio()) - 1.0;
  const double b = s * std::pow(pi * cfg.bs_density, -cfg.path_loss / 2) * cfg.snr.noise_to_power();
  boost::math::quadrature::exp_sinh<double> es;
  const double a = c.c2 + c.c1 * x;
  return x * es.integrate([&](double t) { return std::exp(-a * t - b * std::pow(t, cfg.path_loss / 2)); });
}

// alpha = 4 closed form: int_0^inf exp(-a t - b t^2) dt = sqrt(pi / b) / 2 * exp(a^2 / 4b) erfc(a / 2 sqrt b)
double f_alpha4(double x, int k, const NetworkConfig& cfg) {
  const CConstants c = c_oracle(k, cfg);
  const double s = std::exp2(k * cfg.rate_ratio()) - 1.0;
  const double b = s / (pi * cfg.bs_density * pi * cfg.bs_density) * cfg.snr.noise_to_power();
  const long double a = c.c2 + c.c1 * x;
  const long double z = a / (2 * std::sqrt(static_cast<long double>(b)));
  return x * static_cast<double>(std::sqrt(pi / b) / 2 * std::exp(z * z) * std::erfc(z));
}

}  // namespace

TEST_CASE("beta values") {
  CHECK(beta(0.5, 0.5) == doctest::Approx(pi).epsilon(1e-14));
  CHECK(beta(0.5, 0.5) == doctest::Approx(3.14159265).epsilon(1e-9));
  CHECK(beta(2.0 / 3, 1.0 / 3) == doctest::Approx(2 * pi / std::sqrt(3.0)).epsilon(1e-13));
  CHECK(beta(2.0 / 3, 1.0 / 3) == doctest::Approx(3.62759873).epsilon(1e-9));
  CHECK(beta(0.3, 1.7) == doctest::Approx(beta_oracle(0.3, 1.7)).epsilon(1e-10));
  CHECK_THROWS_AS(beta(0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(beta(0.5, -1.0), std::domain_error);
}

TEST_CASE("complementary incomplete beta") {
  CHECK(beta_comp_inc(0.5, 0.5, 0.0) == beta(0.5, 0.5));
  CHECK(beta_comp_inc(0.5, 0.5, 1.0) == 0.0);
  const double z = std::exp2(-0.05);
  // int_z^1 du / sqrt(u (1 - u)) = 2 asin(sqrt(1 - z))
  CHECK(beta_comp_inc(0.5, 0.5, z) == doctest::Approx(2 * std::asin(std::sqrt(1 - z))).epsilon(1e-12));
  CHECK(beta_comp_inc(1.5, 0.8, 0.3) == doctest::Approx(beta_oracle(1.5, 0.8, 0.3, 1.0)).epsilon(1e-10));
  CHECK_THROWS_AS(beta_comp_inc(0.5, 0.5, 1.5), std::domain_error);
  CHECK_THROWS_AS(beta_comp_inc(0.0, 0.5, 0.5), std::domain_error);

  // Complement plus the lower integral gives the full Beta.
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int t = 0; t < 50; ++t) {
    const double x = u(gen), zz = u(gen);
    const double lower = beta_oracle(x, 1 - x, 0.0, zz);
    CHECK(std::abs(beta_comp_inc(x, 1 - x, zz) + lower - beta(x, 1 - x)) < 1e-10);
  }
}

TEST_CASE("c constants") {
  NetworkConfig cfg;
  const CConstants c = c_constants(1, cfg);
  CHECK(c.c2 == doctest::Approx(0.5 * pi * std::sqrt(std::exp2(0.05) - 1)).epsilon(1e-13));
  CHECK(c.c2 == doctest::Approx(0.29499).epsilon(1e-4));
  for (int k : {1, 2, 5, 20}) {
    const CConstants got = c_constants(k, cfg);
    const CConstants want = c_oracle(k, cfg);
    CHECK(got.c1 == doctest::Approx(want.c1).epsilon(1e-10));
    CHECK(got.c2 == doctest::Approx(want.c2).epsilon(1e-10));
    CHECK(got.c2 > 0);
    CHECK(got.c1 + got.c2 > 0);
  }
  // K = 20 at tau/W = 0.05: threshold 1, so c2 = pi/2 and c1 = 1 - pi/4.
  CHECK(c_constants(20, cfg).c2 == doctest::Approx(pi / 2).epsilon(1e-13));
  CHECK(c_constants(20, cfg).c1 == doctest::Approx(1 - pi / 4).epsilon(1e-12));

  cfg.path_loss = 3.0;
  for (int k : {1, 3}) {
    CHECK(c_constants(k, cfg).c1 == doctest::Approx(c_oracle(k, cfg).c1).epsilon(1e-10));
    CHECK(c_constants(k, cfg).c2 == doctest::Approx(c_oracle(k, cfg).c2).epsilon(1e-10));
  }
  cfg.target_rate = 1e-3;  // k tau / W -> 0
  CHECK(c_constants(1, cfg).c2 < 1e-3);
}

TEST_CASE("f_k at infinite snr is the closed form") {
  const NetworkConfig cfg = fig2(INFINITY);
  const CConstants c = c_constants(1, cfg);
  CHECK(f_k(0.0, 1, cfg) == 0.0);
  CHECK(f_k(0.6811, 1, cfg) == doctest::Approx(0.6811 / (c.c2 + c.c1 * 0.6811)).epsilon(1e-15));
  for (double x : {0.1, 0.5, 1.0}) {
    const double d = c.c2 + c.c1 * x;
    CHECK(f_k_prime(x, 1, cfg) == doctest::Approx(c.c2 / (d * d)).epsilon(1e-14));
  }
}

TEST_CASE("f_k quadrature vs oracles") {
  for (double snr : {0.0, 10.0, 30.0}) {
    const NetworkConfig cfg = fig2(snr);
    for (int k : {1, 2, 4}) {
      for (double x : {0.0, 1e-7, 0.05, 0.3189, 0.6811, 1.0}) {
        const double got = f_k(x, k, cfg);
        CHECK(std::abs(got - f_alpha4(x, k, cfg)) < 1e-8);
        CHECK(std::abs(got - f_oracle(x, k, cfg)) < 1e-8);
      }
    }
  }
  NetworkConfig cfg = fig2(20.0);
  cfg.path_loss = 3.5;
  for (double x : {0.2, 0.9}) CHECK(std::abs(f_k(x, 2, cfg) - f_oracle(x, 2, cfg)) < 1e-8);
}

TEST_CASE("f_k derivative matches finite differences") {
  const double h = 1e-5;
  for (double snr : {10.0, 30.0, HUGE_VAL}) {
    const NetworkConfig cfg = fig2(snr);
    for (int k : {1, 3}) {
      for (double x : {0.05, 0.25, 0.5, 0.75, 0.95}) {
        const double fd = (f_k(x + h, k, cfg) - f_k(x - h, k, cfg)) / (2 * h);
        CHECK(std::abs(f_k_prime(x, k, cfg) - fd) < 1e-4 * std::abs(fd));
      }
    }
  }
  const NetworkConfig cfg = fig2(30.0);
  const double at_one = f_k_prime(1.0, 1, cfg);
  CHECK(at_one > 0);
  const double one_sided = (f_k(1.0, 1, cfg) - f_k(1.0 - h, 1, cfg)) / h;
  CHECK(std::abs(at_one - one_sided) < 1e-4 * at_one);
  CHECK_THROWS_AS(f_k_prime(0.0, 1, cfg), std::domain_error);
}

TEST_CASE("f_k monotone in x, decreasing in k") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    NetworkConfig cfg;
    cfg.bs_density = 0.001 + 0.05 * u(gen);
    cfg.path_loss = 2.2 + 3 * u(gen);
    cfg.target_rate = 1e5 + 1e6 * u(gen);
    cfg.snr = Snr::from_db(-5 + 50 * u(gen));
    cfg.cache_size = 3;
    const CoverageKernel kernel(cfg);
    double prev = 0.0;
    for (int i = 0; i <= 19; ++i) {
      const double x = i / 19.0;
      const double v = kernel.f(x, 1);
      CHECK(v >= prev - 1e-12);
      prev = v;
      if (x > 0) {
        CHECK(kernel.f(x, 2) < v);
        CHECK(kernel.f(x, 3) < kernel.f(x, 2));
      }
    }
  }
}

TEST_CASE("f_k high snr limit and determinism") {
  NetworkConfig high;
  high.snr = Snr::linear(1e8);
  const NetworkConfig inf = fig2(INFINITY);
  for (int k : {1, 4}) {
    for (double x : {0.1, 0.5, 1.0}) CHECK(std::abs(f_k(x, k, high) - f_k(x, k, inf)) < 1e-3);
  }
  const NetworkConfig cfg = fig2(17.0);
  const double a = f_k(0.37, 2, cfg);
  const double b = f_k(0.37, 2, cfg);
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

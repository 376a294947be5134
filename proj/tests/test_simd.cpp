#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mcache/rng.hpp"
#include "mcache/simd/kernels.hpp"

using namespace mcache;
using simd::Isa;

namespace {

struct Points {
  std::vector<double> x, y, fading;
};

Points random_points(std::mt19937_64& gen, std::size_t n, double side) {
  std::uniform_real_distribution<double> u(0, side);
  std::exponential_distribution<double> e(1);
  Points p;
  for (std::size_t i = 0; i < n; ++i) {
    p.x.push_back(u(gen));
    p.y.push_back(u(gen));
    p.fading.push_back(e(gen));
  }
  return p;
}

}  // namespace

TEST_CASE("philox known answers") {
  using B = Philox4x32::Block;
  CHECK(Philox4x32::bijection(B{0, 0, 0, 0}, {0, 0}) ==
        B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::bijection(B{~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::bijection(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                              {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("philox streams") {
  Philox4x32 a(7, 3), b(7, 3), c(7, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a();
    CHECK(va == b());
    differs |= va != c();
  }
  CHECK(differs);
  Philox4x32 r(1, 0);
  double mean = 0;
  for (int i = 0; i < 100000; ++i) mean += uniform01(r);
  CHECK(std::abs(mean / 100000 - 0.5) < 0.005);
}

TEST_CASE("isa selection") {
  CHECK(simd::isa_supported(Isa::Scalar));
  const Isa before = simd::active_isa();
  simd::set_isa(Isa::Scalar);
  CHECK(simd::active_isa() == Isa::Scalar);
  CHECK(simd::isa_name(Isa::Avx2) == "avx2");
  if (simd::isa_supported(Isa::Avx2)) {
    simd::set_isa(Isa::Avx2);
    CHECK(simd::active_isa() == Isa::Avx2);
  } else {
    CHECK_THROWS(simd::set_isa(Isa::Avx2));
  }
  simd::set_isa(before);
}

TEST_CASE("scalar and avx2 kernels agree") {
  if (!simd::isa_supported(Isa::Avx2)) {
    MESSAGE("avx2 not available; equivalence skipped");
    return;
  }
  const auto& s = simd::kernels(Isa::Scalar);
  const auto& v = simd::kernels(Isa::Avx2);
  std::mt19937_64 gen(3);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 31u, 100u, 1023u}) {
    for (double period : {0.0, 50.0}) {
      const Points p = random_points(gen, n, 50.0);
      const double x0 = 25.0, y0 = 25.0;
      std::vector<double> ds(n), dv(n);
      s.squared_distances(p.x.data(), p.y.data(), n, x0, y0, period, ds.data());
      v.squared_distances(p.x.data(), p.y.data(), n, x0, y0, period, dv.data());
      CHECK(ds == dv);

      for (double half_alpha : {2.0, 1.5, 1.75}) {
        const double is = s.interference_sum(ds.data(), p.fading.data(), n, half_alpha);
        const double iv = v.interference_sum(ds.data(), p.fading.data(), n, half_alpha);
        CHECK(std::abs(is - iv) <= 1e-12 * std::abs(is));
      }

      for (double r2 : {0.0, 1.0, 25.0, 400.0}) {
        CHECK(s.any_within(p.x.data(), p.y.data(), n, x0, y0, period, r2) ==
              v.any_within(p.x.data(), p.y.data(), n, x0, y0, period, r2));
      }

      std::vector<double> prob(n), ps(n + 1), pv(n + 1);
      std::uniform_real_distribution<double> u(0, 1);
      for (double& q : prob) q = u(gen);
      s.poisson_binomial(prob.data(), n, ps.data());
      v.poisson_binomial(prob.data(), n, pv.data());
      CHECK(ps == pv);
    }
  }
}

TEST_CASE("kernel semantics") {
  const std::vector<double> xs = {1.0, 9.0}, ys = {0.0, 0.0};
  std::vector<double> out(2);
  simd::squared_distances(xs, ys, 0.0, 0.0, 0.0, out);
  CHECK(out == std::vector<double>{1.0, 81.0});
  simd::squared_distances(xs, ys, 0.0, 0.0, 10.0, out);
  CHECK(out == std::vector<double>{1.0, 1.0});

  CHECK_FALSE(simd::any_within(xs, ys, 0.0, 0.0, 0.0, 1.0));  // strict
  CHECK(simd::any_within(xs, ys, 0.0, 0.0, 0.0, 1.0001));

  const std::vector<double> d2 = {4.0}, h = {2.0};
  CHECK(simd::interference_sum(d2, h, 2.0) == doctest::Approx(2.0 / 16));

  const std::vector<double> r = {0.5, 0.5};
  std::vector<double> pmf(3);
  simd::poisson_binomial(r, pmf);
  CHECK(pmf == std::vector<double>{0.25, 0.5, 0.25});
}

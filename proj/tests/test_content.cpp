#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mcache/content.hpp"

using namespace mcache;

namespace {

std::vector<double> random_marginals(std::mt19937_64& gen, int n, int k) {
  // Gamma weights scaled so that the sum capped at one equals k.
  std::gamma_distribution<double> g(0.5, 1.0);
  std::vector<double> w(n);
  for (double& v : w) v = g(gen) + 1e-6;
  const auto capped = [&](double s) {
    double total = 0;
    for (double v : w) total += std::min(1.0, s * v);
    return total;
  };
  double lo = 0, hi = 1;
  while (capped(hi) < k) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (capped(mid) < k ? lo : hi) = mid;
  }
  for (double& v : w) v = std::min(1.0, hi * v);
  return w;
}

}  // namespace

TEST_CASE("zipf") {
  const Popularity u = zipf(5, 0.0);
  for (std::size_t n = 0; n < 5; ++n) CHECK(u[n] == doctest::Approx(0.2).epsilon(1e-15));
  const Popularity z = zipf(5, 2.0);
  double norm = 0;
  for (int n = 1; n <= 5; ++n) norm += 1.0 / (n * n);
  CHECK(norm == doctest::Approx(1.4636).epsilon(1e-4));
  for (int n = 1; n <= 5; ++n) CHECK(z[n - 1] == doctest::Approx(1.0 / (n * n) / norm).epsilon(1e-14));
  CHECK(z[0] == doctest::Approx(0.6832).epsilon(1e-4));
  CHECK(z[4] == doctest::Approx(0.0273).epsilon(1e-3));
  CHECK(zipf(1, 3.0)[0] == 1.0);
}

TEST_CASE("popularity validation") {
  CHECK_THROWS(Popularity({0.3, 0.7}));
  CHECK_THROWS(Popularity({0.5, 0.6}));
  CHECK_THROWS(Popularity({1.0, 0.0}));
  CHECK_NOTHROW(Popularity({0.5, 0.5 + 1e-13}));
}

TEST_CASE("combination canonical form") {
  const Combination a{3, 1, 2};
  const Combination b{2, 3, 1};
  CHECK(a == b);
  CHECK(CombinationHash{}(a) == CombinationHash{}(b));
  CHECK(a.contains(1));
  CHECK_FALSE(a.contains(0));
  CHECK_THROWS(Combination({1, 1}));
}

TEST_CASE("marginals") {
  const auto k1 = CachingDistribution::from_file_probs(std::vector<double>{0.6811, 0.3189, 0, 0, 0});
  const Marginals t1 = marginals(k1, 5);
  CHECK(t1[0] == doctest::Approx(0.6811));
  CHECK(t1[1] == doctest::Approx(0.3189));
  CHECK(t1[4] == 0.0);

  const CachingDistribution p(3, 2, {{Combination{0, 1}, 0.5}, {Combination{0, 2}, 0.5}});
  const Marginals t = marginals(p, 3);
  CHECK(t == Marginals{1.0, 0.5, 0.5});

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<CachingDistribution::Entry> entries;
    double total = 0;
    for (const auto& c : all_combinations(6, 3)) {
      entries.push_back({c, u(gen)});
      total += entries.back().prob;
    }
    for (auto& e : entries) e.prob /= total;
    const Marginals m = marginals(CachingDistribution(6, 3, entries), 6);
    double sum = 0;
    for (double v : m) sum += v;
    CHECK(std::abs(sum - 3.0) < 1e-12);
  }
}

TEST_CASE("distribution validation") {
  CHECK_THROWS(CachingDistribution(3, 2, {{Combination{0, 1}, 0.5}}));
  CHECK_THROWS(CachingDistribution(3, 2, {{Combination{0}, 1.0}}));
  CHECK_THROWS(CachingDistribution(3, 2, {{Combination{0, 5}, 1.0}}));
  const CachingDistribution d(3, 2, {{Combination{0, 1}, 0.5}, {Combination{1, 0}, 0.5}});
  CHECK(d.size() == 1);
  CHECK(d.prob(Combination{0, 1}) == doctest::Approx(1.0));
}

TEST_CASE("decompose marginals") {
  SUBCASE("examples") {
    const CachingDistribution p = decompose_marginals(std::vector<double>{1.0, 0.5, 0.5}, 2);
    const Marginals t = marginals(p, 3);
    CHECK(t[0] == doctest::Approx(1.0));
    CHECK(t[1] == doctest::Approx(0.5));
    CHECK(t[2] == doctest::Approx(0.5));

    const std::vector<double> uniform(7, 3.0 / 7);
    const Marginals back = marginals(decompose_marginals(uniform, 3), 7);
    for (double v : back) CHECK(v == doctest::Approx(3.0 / 7).epsilon(1e-12));

    const CachingDistribution z = decompose_marginals(std::vector<double>{0.8, 0.7, 0.5, 0.0}, 2);
    for (const auto& e : z.support()) CHECK_FALSE(e.combo.contains(3));
  }
  SUBCASE("infeasible") {
    CHECK_THROWS_AS(decompose_marginals(std::vector<double>{0.5, 0.5, 0.5}, 2), InfeasibleError);
    CHECK_THROWS_AS(decompose_marginals(std::vector<double>{1.5, 0.5, 0.0}, 2), InfeasibleError);
  }
  SUBCASE("round trip on random marginals") {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 2 + static_cast<int>(gen() % 30);
      const int k = 1 + static_cast<int>(gen() % n);
      const std::vector<double> t = random_marginals(gen, n, k);
      const CachingDistribution p = decompose_marginals(t, k);
      CHECK(p.support().size() <= static_cast<std::size_t>(n));
      const Marginals back = marginals(p, n);
      double worst = 0;
      for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(back[i] - t[i]));
      CHECK(worst < 1e-9);
    }
  }
}

TEST_CASE("combinations containing a file") {
  std::vector<FileId> five = {0, 1, 2, 3, 4};
  CHECK(combos_containing(0, five, 4).count() == 4);
  int seen = 0;
  for (const auto& c : combos_containing(0, five, 4)) {
    CHECK(c.contains(0));
    CHECK(c.size() == 4);
    ++seen;
  }
  CHECK(seen == 4);

  std::vector<Combination> single;
  for (const auto& c : combos_containing(2, five, 1)) single.push_back(c);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == Combination{2});

  // Brute force over all 4-subsets of eight files.
  std::vector<FileId> eight = {0, 1, 2, 3, 4, 5, 6, 7};
  std::set<Combination> expect;
  for (unsigned mask = 0; mask < 256; ++mask) {
    if (__builtin_popcount(mask) != 4 || !(mask & 2u)) continue;
    std::vector<FileId> f;
    for (FileId i = 0; i < 8; ++i) {
      if (mask >> i & 1u) f.push_back(i);
    }
    expect.insert(Combination(f));
  }
  std::set<Combination> got;
  for (const auto& c : combos_containing(1, eight, 4)) got.insert(c);
  CHECK(got == expect);
  CHECK(got.size() == 35);
  CHECK(combos_containing(1, eight, 4).count() == 35);
}

TEST_CASE("binomial and all_combinations") {
  CHECK(binomial(40, 20) == 137846528820ULL);
  CHECK(binomial(8, 4) == 70);
  CHECK(binomial(5, 0) == 1);
  CHECK(binomial(3, 5) == 0);
  CHECK(all_combinations(8, 4).size() == 70);
}

TEST_CASE("distribution text format round trip") {
  const CachingDistribution p(5, 2, {{Combination{0, 1}, 0.25}, {Combination{2, 4}, 0.75}});
  std::stringstream ss;
  write_distribution(ss, p);
  CHECK(ss.str().rfind("#N=5 K=2\n", 0) == 0);
  CHECK(ss.str().find("1,2\t") != std::string::npos);
  const CachingDistribution back = read_distribution(ss);
  CHECK(back.num_files() == 5);
  CHECK(back.cache_size() == 2);
  CHECK(back.prob(Combination{2, 4}) == 0.75);

  std::stringstream bad("#N=3 K=2\n1,4\t1.0\n");
  CHECK_THROWS(read_distribution(bad));
}

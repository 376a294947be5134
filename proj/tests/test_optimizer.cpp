#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "mcache/lp.hpp"
#include "mcache/optimizer.hpp"

using namespace mcache;

namespace {

NetworkConfig base(double snr_db, int n, int k) {
  NetworkConfig cfg;
  cfg.snr = std::isinf(snr_db) ? Snr::infinite() : Snr::from_db(snr_db);
  cfg.num_files = n;
  cfg.cache_size = k;
  return cfg;
}

}  // namespace

TEST_CASE("simplex projection examples") {
  const std::vector<double> feasible = {0.2, 0.5, 0.3};
  const auto same = project_simplex(feasible);
  for (int j = 0; j < 3; ++j) CHECK(same.p[j] == doctest::Approx(feasible[j]).epsilon(1e-15));

  const auto r = project_simplex(std::vector<double>{0.5, 0.7, 0.2});
  CHECK(r.nu == doctest::Approx(0.4 / 3).epsilon(1e-14));
  CHECK(r.p[0] == doctest::Approx(0.36667).epsilon(1e-4));
  CHECK(r.p[1] == doctest::Approx(0.56667).epsilon(1e-4));
  CHECK(r.p[2] == doctest::Approx(0.06667).epsilon(1e-3));

  const auto big = project_simplex(std::vector<double>{10, 0, 0});
  CHECK(big.p == std::vector<double>{1, 0, 0});
}

TEST_CASE("simplex projection vs active-set oracle and optimality") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> g(0, 1);
  std::exponential_distribution<double> e(1);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 8;
    std::vector<double> v(n);
    for (double& x : v) x = g(gen);
    const auto got = project_simplex(v);
    const auto want = oracle::projection(v);
    REQUIRE(want.size() == v.size());
    for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(got.p[j] - want[j]));
    CHECK(std::accumulate(got.p.begin(), got.p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));

    double dist = 0;
    for (int j = 0; j < n; ++j) dist += (got.p[j] - v[j]) * (got.p[j] - v[j]);
    for (int s = 0; s < 5; ++s) {
      std::vector<double> q(n);
      double tot = 0;
      for (double& x : q) tot += x = e(gen);
      double other = 0;
      for (int j = 0; j < n; ++j) other += (q[j] / tot - v[j]) * (q[j] / tot - v[j]);
      CHECK(other >= dist - 1e-12);
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("water-filling at K = 1") {
  const NetworkConfig inf = base(INFINITY, 5, 1);
  const CConstants c = c_constants(1, inf);

  const WaterfillResult flat = waterfill_k1(zipf(5, 0.0), inf);
  for (double v : flat.solution) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));

  const Popularity a = zipf(5, 0.3);
  const WaterfillResult w = waterfill_k1(a, inf);
  CHECK(w.closed_form_used);
  double roots = 0;
  for (int n = 0; n < 5; ++n) roots += std::sqrt(a[n]);
  const double closed = (1 / c.c1) * (1 - roots * roots / (5 + c.c1 / c.c2));
  const auto p = CachingDistribution::from_file_probs(w.solution);
  CHECK(q1_inf(p, a, inf) == doctest::Approx(closed).epsilon(1e-12));

  const WaterfillResult steep = waterfill_k1(zipf(5, 2.0), inf);
  CHECK_FALSE(steep.closed_form_used);
  CHECK(steep.solution[4] == 0.0);
  for (int n = 1; n < 5; ++n) CHECK(steep.solution[n] <= steep.solution[n - 1]);
  CHECK(waterfill_kkt_residual(zipf(5, 2.0), inf, steep) < 1e-8);
  CHECK_THROWS(waterfill_k1(a, base(INFINITY, 5, 2)));
}

TEST_CASE("water-filling KKT and dominance") {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k : {1, 3, 6}) {
    for (double gamma : {0.0, 0.5, 1.0, 1.5, 2.5}) {
      const int n = 12;
      const Popularity a = zipf(n, gamma);
      const NetworkConfig cfg = base(INFINITY, n, k);
      const WaterfillResult w = waterfill_T(a, cfg);
      CHECK(std::accumulate(w.solution.begin(), w.solution.end(), 0.0) ==
            doctest::Approx(k).epsilon(1e-12));
      CHECK(waterfill_kkt_residual(a, cfg, w) < 1e-8);
      for (int i = 1; i < n; ++i) CHECK(w.solution[i] <= w.solution[i - 1] + 1e-15);
      const double best = qK_inf(w.solution, a, cfg);
      for (int trial = 0; trial < 1000 / 15 + 1; ++trial) {
        CHECK(qK_inf(oracle::feasible_marginals(gen, n, k), a, cfg) <= best + 1e-12);
      }
    }
  }
  const WaterfillResult full = waterfill_T(zipf(4, 1.0), base(INFINITY, 4, 4));
  CHECK(full.solution == Marginals(4, 1.0));
  const WaterfillResult even = waterfill_T(zipf(8, 0.0), base(30, 8, 3));
  for (double v : even.solution) CHECK(v == doctest::Approx(3.0 / 8).epsilon(1e-12));
}

TEST_CASE("closed-form regime for K > 1") {
  const Popularity a = zipf(10, 0.2);
  const NetworkConfig cfg = base(INFINITY, 10, 3);
  const CConstants c = c_constants(3, cfg);
  const WaterfillResult w = waterfill_T(a, cfg);
  REQUIRE(w.closed_form_used);
  double roots = 0;
  for (int n = 0; n < 10; ++n) roots += std::sqrt(a[n]);
  for (int n = 0; n < 10; ++n) {
    const double want = (3 + c.c2 / c.c1 * 10) * std::sqrt(a[n]) / roots - c.c2 / c.c1;
    CHECK(w.solution[n] == doctest::Approx(want).epsilon(1e-12));
  }
  const double closed = (1 / c.c1) * (1 - roots * roots / (c.c1 * 3 / c.c2 + 10));
  CHECK(qK_inf(w.solution, a, cfg) == doctest::Approx(closed).epsilon(1e-12));
}

TEST_CASE("pruning") {
  const PrunedFiles p = prune_combinations(std::vector<double>{1, 1, 0.5, 0.5, 0}, 3);
  CHECK(p.fixed == std::vector<FileId>{0, 1});
  CHECK(p.free == std::vector<FileId>{2, 3});
  CHECK(p.excluded == std::vector<FileId>{4});
  CHECK(p.admissible_count() == 2);
  const auto adm = p.admissible();
  CHECK(adm == std::vector<Combination>{Combination{0, 1, 2}, Combination{0, 1, 3}});

  const PrunedFiles frac = prune_combinations(std::vector<double>{0.5, 0.5, 0.5, 0.5}, 2);
  CHECK(frac.fixed.empty());
  CHECK(frac.free.size() == 4);

  const PrunedFiles whole = prune_combinations(std::vector<double>{1, 0, 1, 0}, 2);
  CHECK(whole.admissible_count() == 1);
  CHECK_THROWS_AS(prune_combinations(std::vector<double>{1, 1, 0.5}, 2), InfeasibleError);
}

TEST_CASE("simplex LP vs vertex enumeration") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0, 1);
  const auto combos = all_combinations(5, 2);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> t = oracle::feasible_marginals(gen, 5, 2);
    LinearProgram lp;
    lp.rows.assign(6, std::vector<double>(combos.size(), 0.0));
    lp.rhs.assign(t.begin(), t.end());
    lp.rhs.push_back(1.0);
    for (std::size_t c = 0; c < combos.size(); ++c) {
      for (FileId n : combos[c].files()) lp.rows[n][c] = 1.0;
      lp.rows[5][c] = 1.0;
      lp.cost.push_back(u(gen));
    }
    const LpSolution s = solve_lp(lp);
    worst = std::max(worst, std::abs(s.objective - oracle::lp_vertices(lp)));
    std::size_t nonzero = 0;
    for (double x : s.x) nonzero += x > 1e-12;
    CHECK(nonzero <= 6);
  }
  CHECK(worst < 1e-9);

  LinearProgram bad;
  bad.rows = {{1.0, 1.0}, {1.0, 1.0}};
  bad.rhs = {1.0, 2.0};
  bad.cost = {1.0, 0.0};
  CHECK_THROWS_AS(solve_lp(bad), InfeasibleError);
}

TEST_CASE("LP refinement") {
  const Popularity a = zipf(5, 0.8);
  const NetworkConfig cfg = base(30, 5, 2);
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> t = oracle::feasible_marginals(gen, 5, 2);
    const auto cands = prune_combinations(t, 2).admissible();
    const LpRefineResult r = lp_refine(t, cands, a, cfg);
    const Marginals back = marginals(r.distribution, 5);
    for (int n = 0; n < 5; ++n) CHECK(std::abs(back[n] - t[n]) < 1e-9);
    CHECK(r.objective == doctest::Approx(qK(r.distribution, a, cfg).q).epsilon(1e-10));
    CHECK(r.objective >= qK(decompose_marginals(t, 2), a, cfg).q - 1e-12);
  }
  const std::vector<double> t = {1, 1, 0, 0, 0};
  const std::vector<Combination> single = {Combination{0, 1}};
  const LpRefineResult one = lp_refine(t, single, a, cfg);
  CHECK(one.distribution.prob(Combination{0, 1}) == 1.0);

  // Equal weights: any feasible point is optimal, and marginals still hold.
  const auto cands = all_combinations(4, 2);
  LinearProgram lp;
  const std::vector<double> t4 = {0.7, 0.6, 0.4, 0.3};
  lp.rows.assign(5, std::vector<double>(cands.size(), 0.0));
  lp.rhs = {0.7, 0.6, 0.4, 0.3, 1.0};
  for (std::size_t c = 0; c < cands.size(); ++c) {
    for (FileId n : cands[c].files()) lp.rows[n][c] = 1.0;
    lp.rows[4][c] = 1.0;
    lp.cost.push_back(1.0);
  }
  const LpSolution eq = solve_lp(lp);
  CHECK(eq.objective == doctest::Approx(1.0).epsilon(1e-12));
  for (int n = 0; n < 4; ++n) {
    double tn = 0;
    for (std::size_t c = 0; c < cands.size(); ++c) tn += lp.rows[n][c] * eq.x[c];
    CHECK(tn == doctest::Approx(t4[n]).epsilon(1e-12));
  }
  const std::vector<Combination> wrong = {Combination{0, 2}};
  CHECK_THROWS(lp_refine(t, wrong, a, cfg));
}

TEST_CASE("water-filling followed by LP refinement") {
  for (double gamma : {0.4, 0.8, 1.2}) {
    const Popularity a = zipf(12, gamma);
    const NetworkConfig cfg = base(30, 12, 4);
    const Algorithm3Result r = algorithm3(a, cfg);
    CHECK(r.exhaustive);
    const double plain = qK(decompose_marginals(r.waterfill.solution, 4), a, cfg).q;
    CHECK(qK(r.distribution, a, cfg).q >= plain - 1e-9);
    const Marginals back = marginals(r.distribution, 12);
    for (int n = 0; n < 12; ++n) CHECK(std::abs(back[n] - r.waterfill.solution[n]) < 1e-9);
  }
  const Algorithm3Result full = algorithm3(zipf(4, 1.0), base(30, 4, 4));
  REQUIRE(full.distribution.size() == 1);
  CHECK(full.distribution.prob(Combination{0, 1, 2, 3}) == 1.0);

  // Budget smaller than the admissible set forces the sampled pool.
  const Popularity a = zipf(30, 0.3);
  const NetworkConfig cfg = base(30, 30, 6);
  const Algorithm3Result pooled = algorithm3(a, cfg, 200);
  CHECK_FALSE(pooled.exhaustive);
  CHECK(pooled.candidates <= 200);
  CHECK(pooled.objective >= qK(decompose_marginals(pooled.waterfill.solution, 6), a, cfg).q - 1e-9);
}

TEST_CASE("gradient projection") {
  SUBCASE("K = 1 converges to the water-filling point") {
    const Popularity a({0.9, 0.1});
    const NetworkConfig cfg = base(INFINITY, 2, 1);
    GradientOptions opts;
    opts.step_scale = 5.0;
    opts.max_iters = 100000;
    const GradientResult g = gradient_projection(a, cfg, opts);
    const WaterfillResult w = waterfill_k1(a, cfg);
    const Marginals t = marginals(g.distribution, 2);
    CHECK(std::abs(t[0] - w.solution[0]) < 1e-3);
  }
  SUBCASE("zero iterations return the uniform start") {
    GradientOptions opts;
    opts.max_iters = 0;
    const GradientResult g = gradient_projection(zipf(5, 1.0), base(30, 5, 2), opts);
    CHECK(g.iterations == 0);
    CHECK(g.distribution.size() == 10);
    for (const auto& e : g.distribution.entries()) CHECK(e.prob == doctest::Approx(0.1).epsilon(1e-14));
  }
  SUBCASE("objective rises and settles") {
    GradientOptions opts;
    opts.max_iters = 2000;
    const Popularity a = zipf(6, 0.8);
    const NetworkConfig cfg = base(30, 6, 3);
    const GradientResult g = gradient_projection(a, cfg, opts);
    const auto& q = g.objective;
    CHECK(q.back() >= q.front() - 1e-9);
    for (std::size_t i = q.size() - 10; i < q.size(); ++i) CHECK(q[i] >= q[i - 1] - 1e-9);
    CHECK(qK(g.distribution, a, cfg).q == doctest::Approx(q.back()).epsilon(1e-12));
  }
  SUBCASE("explicit initial point") {
    const CachingDistribution start(4, 2, {{Combination{0, 1}, 1.0}});
    GradientOptions opts;
    opts.max_iters = 0;
    const GradientResult g =
        gradient_projection(zipf(4, 1.0), base(30, 4, 2), opts, {}, start);
    CHECK(g.distribution.prob(Combination{0, 1}) == 1.0);
  }
}

TEST_CASE("baselines") {
  const Popularity a = zipf(4, 1.0);
  const NetworkConfig cfg = base(30, 4, 2);
  const CachingPolicy b1 = baseline(a, cfg, 1);
  CHECK(b1.distribution()->prob(Combination{0, 1}) == 1.0);
  CHECK(b1.marginals() == Marginals{1, 1, 0, 0});
  for (double v : baseline(a, cfg, 3).marginals()) CHECK(v == doctest::Approx(0.5));

  // Presence probability under i.i.d. draws, by enumerating all ordered pairs for N = 3.
  const Popularity b({0.5, 0.3, 0.2});
  const CachingPolicy b2 = baseline(b, base(30, 3, 2), 2);
  std::vector<double> present(3, 0.0);
  for (int x = 0; x < 3; ++x) {
    for (int y = 0; y < 3; ++y) {
      for (int n = 0; n < 3; ++n) present[n] += (x == n || y == n) ? b[x] * b[y] : 0.0;
    }
  }
  const Marginals m = b2.marginals();
  for (int n = 0; n < 3; ++n) CHECK(m[n] == doctest::Approx(present[n]).epsilon(1e-14));
  CHECK_THROWS(baseline(a, cfg, 4));
}

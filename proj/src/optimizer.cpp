#include "mcache/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "mcache/lp.hpp"
#include "mcache/math_kernel.hpp"
#include "mcache/rng.hpp"

namespace mcache {

namespace {

NetworkConfig with_catalog(NetworkConfig cfg, int num_files, int cache_size) {
  cfg.num_files = num_files;
  cfg.cache_size = cache_size;
  return cfg;
}

}  // namespace

SimplexProjection project_simplex(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("project_simplex: empty vector");
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Largest rho with sorted[rho] - (prefix(rho) - 1) / (rho + 1) > 0.
  double prefix = 0.0;
  double nu = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    prefix += sorted[j];
    const double candidate = (prefix - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) nu = candidate;
  }
  SimplexProjection out;
  out.nu = nu;
  out.p.resize(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out.p[j] = std::max(v[j] - nu, 0.0);
  return out;
}

GradientResult gradient_projection(const Popularity& a, const NetworkConfig& cfg,
                                   const GradientOptions& opts,
                                   std::vector<Combination> candidates,
                                   std::optional<CachingDistribution> initial) {
  const int n_files = static_cast<int>(a.size());
  const int cache = cfg.cache_size;
  const NetworkConfig local = with_catalog(cfg, n_files, cache);
  if (candidates.empty()) {
    if (binomial(n_files, cache) > opts.max_candidates) {
      throw std::invalid_argument("gradient_projection: C(N, K) exceeds max_candidates");
    }
    candidates = all_combinations(n_files, cache);
  }

  std::vector<double> x(candidates.size(), 1.0 / static_cast<double>(candidates.size()));
  if (initial) {
    if (initial->num_files() != n_files || initial->cache_size() != cache) {
      throw std::invalid_argument("gradient_projection: initial distribution has wrong shape");
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) x[i] = initial->prob(candidates[i]);
    const double covered = std::accumulate(x.begin(), x.end(), 0.0);
    if (std::abs(covered - 1.0) > kProbabilityTol) {
      throw std::invalid_argument("gradient_projection: initial support outside candidates");
    }
  }

  auto as_distribution = [&](const std::vector<double>& probs) {
    std::vector<CachingDistribution::Entry> entries;
    entries.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) entries.push_back({candidates[i], probs[i]});
    return CachingDistribution(n_files, cache, std::move(entries));
  };
  auto objective_of = [&](const SuccessModel& model, const std::vector<double>& probs) {
    double q = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (probs[i] > 0.0) q += probs[i] * model.combination_value(candidates[i]);
    }
    return q;
  };

  if (opts.trace) *opts.trace << "iteration,objective,step,residual\n";

  GradientResult result;
  CachingDistribution dist = as_distribution(x);
  SuccessModel model(a, local, marginals(dist, n_files));
  result.objective.push_back(objective_of(model, x));
  if (opts.trace) *opts.trace << 0 << ',' << result.objective.back() << ",0,0\n";

  std::vector<double> ascent(x.size());
  for (int t = 1; t <= opts.max_iters; ++t) {
    const std::vector<double> grad = detail::grad_qK_extended(dist, model, candidates);
    const double step = opts.step_scale / t;
    for (std::size_t i = 0; i < x.size(); ++i) ascent[i] = x[i] + step * grad[i];
    SimplexProjection next = project_simplex(ascent);
    double change = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) change = std::max(change, std::abs(next.p[i] - x[i]));
    x = std::move(next.p);

    dist = as_distribution(x);
    model = SuccessModel(a, local, marginals(dist, n_files));
    result.objective.push_back(objective_of(model, x));
    result.iterations = t;
    if (opts.trace) {
      *opts.trace << t << ',' << result.objective.back() << ',' << step << ',' << change << '\n';
    }
    if (change < opts.stop_tol) {
      result.converged = true;
      break;
    }
  }

  std::vector<CachingDistribution::Entry> support;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (x[i] > 0.0) support.push_back({candidates[i], x[i]});
  }
  result.distribution = CachingDistribution(n_files, cache, std::move(support));
  return result;
}

namespace {

struct WaterLevel {
  const Popularity& a;
  CConstants c;
  int cache;

  double level(std::size_t n, double nu) const {
    const double t = (std::sqrt(a[n] * c.c2 / nu) - c.c2) / c.c1;
    return std::clamp(t, 0.0, 1.0);
  }
  double total(double nu) const {
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += level(n, nu);
    return s;
  }
  /// nu for which the uncapped, positive entries in `free` plus `capped` ones sum to K.
  double exact_nu(const std::vector<std::size_t>& free, std::size_t capped) const {
    double root_sum = 0.0;
    for (std::size_t n : free) root_sum += std::sqrt(a[n]);
    const double denom = c.c1 * (cache - static_cast<double>(capped)) + c.c2 * free.size();
    const double r = root_sum / denom;
    return c.c2 * r * r;
  }
  Marginals solution(const std::vector<std::size_t>& free, const std::vector<std::size_t>& capped,
                     double nu) const {
    Marginals t(a.size(), 0.0);
    for (std::size_t n : capped) t[n] = 1.0;
    for (std::size_t n : free) t[n] = (std::sqrt(a[n] * c.c2 / nu) - c.c2) / c.c1;
    return t;
  }
};

}  // namespace

WaterfillResult waterfill_T(const Popularity& a, const NetworkConfig& cfg) {
  const int n_files = static_cast<int>(a.size());
  const int cache = cfg.cache_size;
  if (cache < 1 || cache > n_files) throw std::invalid_argument("waterfill_T: need 1 <= K <= N");
  const WaterLevel w{a, c_constants(cache, cfg), cache};
  if (!(w.c.c1 > 0.0) || !(w.c.c2 > 0.0)) {
    throw std::domain_error("waterfill_T: requires c1 > 0 and c2 > 0");
  }

  WaterfillResult result;
  if (cache == n_files) {
    result.solution.assign(n_files, 1.0);
    double smallest = a[n_files - 1];
    const double denom = w.c.c2 + w.c.c1;
    result.nu_star = smallest * w.c.c2 / (denom * denom);
    return result;
  }

  double root_sum = 0.0;
  for (int n = 0; n < n_files; ++n) root_sum += std::sqrt(a[n]);
  const double spread = w.c.c1 * cache + w.c.c2 * n_files;
  const bool top_uncapped = std::sqrt(a[0]) / root_sum <= (w.c.c1 + w.c.c2) / spread;
  const bool tail_positive = std::sqrt(a[n_files - 1]) / root_sum > w.c.c2 / spread;
  std::vector<std::size_t> all(n_files);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (top_uncapped && tail_positive) {
    result.nu_star = w.exact_nu(all, 0);
    result.solution = w.solution(all, {}, result.nu_star);
    result.closed_form_used = true;
    return result;
  }

  // Bisection on the monotone total, then an exact solve on the active set.
  double hi = a[0] / w.c.c2;
  double lo = hi;
  while (w.total(lo) < cache) lo *= 0.5;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (w.total(mid) >= cache ? lo : hi) = mid;
  }
  double nu = lo;
  std::vector<std::size_t> free;
  std::vector<std::size_t> capped;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double t = w.level(n, nu);
    if (t >= 1.0) capped.push_back(n);
    else if (t > 0.0) free.push_back(n);
  }
  if (!free.empty()) {
    const double exact = w.exact_nu(free, capped.size());
    const Marginals t = w.solution(free, capped, exact);
    const bool consistent = std::all_of(free.begin(), free.end(), [&](std::size_t n) {
      return t[n] >= 0.0 && t[n] <= 1.0;
    });
    if (consistent) {
      result.solution = t;
      result.nu_star = exact;
      return result;
    }
  }
  result.solution.resize(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) result.solution[n] = w.level(n, nu);
  result.nu_star = nu;
  return result;
}

WaterfillResult waterfill_k1(const Popularity& a, const NetworkConfig& cfg) {
  if (cfg.cache_size != 1) throw std::invalid_argument("waterfill_k1: requires K = 1");
  return waterfill_T(a, cfg);
}

double waterfill_kkt_residual(const Popularity& a, const NetworkConfig& cfg,
                              const WaterfillResult& w) {
  const CConstants c = c_constants(cfg.cache_size, cfg);
  const double nu = w.nu_star;
  double worst = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double t = w.solution[n];
    const double denom = c.c2 + c.c1 * t;
    const double marginal_gain = a[n] * c.c2 / (denom * denom);
    double violation = 0.0;
    if (t <= 0.0) violation = std::max(0.0, marginal_gain - nu);
    else if (t >= 1.0) violation = std::max(0.0, nu - marginal_gain);
    else violation = std::abs(marginal_gain - nu);
    worst = std::max(worst, violation);
  }
  const double total = std::accumulate(w.solution.begin(), w.solution.end(), 0.0);
  return std::max(worst, std::abs(total - cfg.cache_size));
}

std::uint64_t PrunedFiles::admissible_count() const {
  const int picks = cache_size - static_cast<int>(fixed.size());
  if (picks < 0 || picks > static_cast<int>(free.size())) return 0;
  return binomial(free.size(), picks);
}

std::vector<Combination> PrunedFiles::admissible() const {
  const int picks = cache_size - static_cast<int>(fixed.size());
  std::vector<Combination> out;
  if (picks < 0 || picks > static_cast<int>(free.size())) return out;
  if (picks == 0) return {Combination(fixed)};
  for (const Combination& sub : all_combinations(static_cast<int>(free.size()), picks)) {
    std::vector<FileId> files(fixed);
    for (FileId j : sub.files()) files.push_back(free[j]);
    out.emplace_back(std::move(files));
  }
  return out;
}

PrunedFiles prune_combinations(std::span<const double> t_star, int cache_size, double tol) {
  check_marginals(t_star, cache_size);
  PrunedFiles out;
  out.cache_size = cache_size;
  for (std::size_t n = 0; n < t_star.size(); ++n) {
    const auto id = static_cast<FileId>(n);
    if (t_star[n] >= 1.0 - tol) out.fixed.push_back(id);
    else if (t_star[n] <= tol) out.excluded.push_back(id);
    else out.free.push_back(id);
  }
  if (static_cast<int>(out.fixed.size()) > cache_size) {
    throw InfeasibleError("prune_combinations: more unit marginals than cache slots");
  }
  return out;
}

LpRefineResult lp_refine(std::span<const double> t_star, std::span<const Combination> candidates,
                         const Popularity& a, const NetworkConfig& cfg) {
  if (candidates.empty()) throw InfeasibleError("lp_refine: no candidate combinations");
  const int n_files = static_cast<int>(t_star.size());
  const int cache = static_cast<int>(candidates.front().size());
  const PrunedFiles pruned = prune_combinations(t_star, cache);
  std::vector<int> row_of(n_files, -1);
  for (std::size_t r = 0; r < pruned.free.size(); ++r) row_of[pruned.free[r]] = static_cast<int>(r);

  const SuccessModel model(a, with_catalog(cfg, n_files, cache),
                           Marginals(t_star.begin(), t_star.end()));
  LinearProgram lp;
  const std::size_t m = pruned.free.size() + 1;
  lp.rows.assign(m, std::vector<double>(candidates.size(), 0.0));
  lp.rhs.resize(m);
  for (std::size_t r = 0; r < pruned.free.size(); ++r) lp.rhs[r] = t_star[pruned.free[r]];
  lp.rhs[m - 1] = 1.0;
  lp.cost.resize(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Combination& combo = candidates[c];
    if (static_cast<int>(combo.size()) != cache) {
      throw std::invalid_argument("lp_refine: candidates differ in size");
    }
    std::size_t fixed_seen = 0;
    for (FileId n : combo.files()) {
      if (row_of[n] >= 0) lp.rows[row_of[n]][c] = 1.0;
      else if (t_star[n] >= 0.5) ++fixed_seen;
      else throw std::invalid_argument("lp_refine: candidate holds an excluded file");
    }
    if (fixed_seen != pruned.fixed.size()) {
      throw std::invalid_argument("lp_refine: candidate misses a unit-marginal file");
    }
    lp.rows[m - 1][c] = 1.0;
    lp.cost[c] = model.combination_value(combo);
  }

  const LpSolution sol = solve_lp(lp);
  std::vector<CachingDistribution::Entry> entries;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (sol.x[c] > 1e-15) entries.push_back({candidates[c], sol.x[c]});
  }
  LpRefineResult out;
  out.distribution = CachingDistribution(n_files, cache, std::move(entries));
  out.objective = sol.objective;
  out.pivots = sol.pivots;
  return out;
}

namespace {

std::vector<Combination> candidate_pool(const PrunedFiles& pruned, std::span<const double> t_star,
                                        const SuccessModel& model, std::size_t budget,
                                        std::uint64_t seed) {
  std::unordered_set<Combination, CombinationHash> seen;
  std::vector<Combination> pool;
  auto add = [&](Combination c) {
    if (pool.size() < budget && seen.insert(c).second) pool.push_back(std::move(c));
  };

  std::vector<Combination> seeds;
  for (auto& e : decompose_marginals(t_star, pruned.cache_size).support()) seeds.push_back(e.combo);
  // Seeds go in unconditionally: they keep the marginal system feasible.
  for (const auto& s : seeds) {
    if (seen.insert(s).second) pool.push_back(s);
  }

  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    ranked.emplace_back(model.combination_value(seeds[s]), s);
  }
  std::sort(ranked.begin(), ranked.end(), std::greater<>());
  const std::size_t swap_quota = std::max(pool.size(), budget / 2);
  for (const auto& [value, s] : ranked) {
    const auto files = seeds[s].files();
    for (FileId out_file : files) {
      if (t_star[out_file] >= 1.0 - 1e-12) continue;
      for (FileId in_file : pruned.free) {
        if (pool.size() >= swap_quota) break;
        if (seeds[s].contains(in_file)) continue;
        std::vector<FileId> next;
        for (FileId f : files) next.push_back(f == out_file ? in_file : f);
        add(Combination(std::move(next)));
      }
    }
  }

  const int picks = pruned.cache_size - static_cast<int>(pruned.fixed.size());
  Philox4x32 rng(seed, 0);
  std::vector<double> weight(pruned.free.size());
  for (std::size_t attempt = 0; pool.size() < budget && attempt < 20 * budget; ++attempt) {
    for (std::size_t j = 0; j < weight.size(); ++j) weight[j] = t_star[pruned.free[j]];
    std::vector<FileId> files(pruned.fixed);
    for (int k = 0; k < picks; ++k) {
      double total = std::accumulate(weight.begin(), weight.end(), 0.0);
      double u = uniform01(rng) * total;
      std::size_t j = 0;
      while (j + 1 < weight.size() && (u >= weight[j] || weight[j] == 0.0)) {
        u -= weight[j];
        ++j;
      }
      files.push_back(pruned.free[j]);
      weight[j] = 0.0;
    }
    add(Combination(std::move(files)));
  }
  return pool;
}

}  // namespace

Algorithm3Result algorithm3(const Popularity& a, const NetworkConfig& cfg,
                            std::size_t candidate_budget, std::uint64_t seed) {
  const int n_files = static_cast<int>(a.size());
  const NetworkConfig local = with_catalog(cfg, n_files, cfg.cache_size);
  Algorithm3Result out;
  out.waterfill = waterfill_T(a, local);
  const Marginals& t_star = out.waterfill.solution;
  out.pruned = prune_combinations(t_star, local.cache_size);

  std::vector<Combination> candidates;
  if (out.pruned.admissible_count() <= candidate_budget) {
    candidates = out.pruned.admissible();
    out.exhaustive = true;
  } else {
    const SuccessModel model(a, local, t_star);
    candidates = candidate_pool(out.pruned, t_star, model, candidate_budget, seed);
  }
  out.candidates = candidates.size();
  LpRefineResult lp = lp_refine(t_star, candidates, a, local);
  out.distribution = std::move(lp.distribution);
  out.objective = lp.objective;
  return out;
}

CachingPolicy baseline(const Popularity& a, const NetworkConfig& cfg, int which) {
  const int n_files = static_cast<int>(a.size());
  const int cache = cfg.cache_size;
  if (cache < 1 || cache > n_files) throw std::invalid_argument("baseline: need 1 <= K <= N");
  switch (which) {
    case 1: {
      std::vector<FileId> top(cache);
      std::iota(top.begin(), top.end(), FileId{0});
      return CachingPolicy::from_distribution(
          CachingDistribution(n_files, cache, {{Combination(std::move(top)), 1.0}}));
    }
    case 2:
      return CachingPolicy::independent_draws(a, cache);
    case 3:
      return CachingPolicy::uniform_combination(n_files, cache);
    default:
      throw std::invalid_argument("baseline: expected 1, 2 or 3");
  }
}

}  // namespace mcache

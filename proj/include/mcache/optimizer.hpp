#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mcache/analysis.hpp"
#include "mcache/content.hpp"
#include "mcache/network.hpp"
#include "mcache/policy.hpp"

namespace mcache {

struct SimplexProjection {
  std::vector<double> p;
  double nu = 0.0;  // p_n = [v_n - nu]^+
};

/// Euclidean projection onto {p : p >= 0, sum p = 1}. The cap p <= 1 never
/// binds on this set.
SimplexProjection project_simplex(std::span<const double> v);

struct GradientOptions {
  double step_scale = 0.5;  // epsilon(t) = step_scale / t
  int max_iters = 10000;
  double stop_tol = 1e-7;   // on max |p(t+1) - p(t)|
  /// Largest C(N, K) accepted when the candidate set is left empty.
  std::uint64_t max_candidates = 20000;
  std::ostream* trace = nullptr;
};

struct GradientResult {
  CachingDistribution distribution;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective;  // qK(p(t)), t = 0..iterations
};

/// Projected gradient ascent on qK over the probabilities of `candidates`
/// (all C(N, K) combinations when empty). The start point defaults to the
/// uniform distribution over the candidates.
GradientResult gradient_projection(const Popularity& a, const NetworkConfig& cfg,
                                   const GradientOptions& opts = {},
                                   std::vector<Combination> candidates = {},
                                   std::optional<CachingDistribution> initial = std::nullopt);

struct WaterfillResult {
  Marginals solution;
  double nu_star = 0.0;
  bool closed_form_used = false;
};

/// Maximizer of sum_n a_n T_n / (c2 + c1 T_n) over 0 <= T_n <= 1, sum T_n = K,
/// with the c-constants of load K:
///   T_n = min([sqrt(a_n c2 / nu) / c1 - c2 / c1]^+, 1).
WaterfillResult waterfill_T(const Popularity& a, const NetworkConfig& cfg);

/// The K = 1 case of waterfill_T. Throws std::invalid_argument unless K = 1.
WaterfillResult waterfill_k1(const Popularity& a, const NetworkConfig& cfg);

/// Largest |stationarity violation| of a water-filling solution.
double waterfill_kkt_residual(const Popularity& a, const NetworkConfig& cfg,
                              const WaterfillResult& w);

struct PrunedFiles {
  std::vector<FileId> fixed;     // T* = 1, in every admissible combination
  std::vector<FileId> free;      // 0 < T* < 1
  std::vector<FileId> excluded;  // T* = 0
  int cache_size = 0;

  std::uint64_t admissible_count() const;
  /// Enumerates every admissible combination; callers check the count first.
  std::vector<Combination> admissible() const;
};

PrunedFiles prune_combinations(std::span<const double> t_star, int cache_size,
                               double tol = 1e-12);

struct LpRefineResult {
  CachingDistribution distribution;
  double objective = 0.0;  // equals qK of the distribution
  int pivots = 0;
};

/// Best distribution over `candidates` whose marginals equal t_star, scored by
/// each combination's success contribution at fixed marginals.
LpRefineResult lp_refine(std::span<const double> t_star, std::span<const Combination> candidates,
                         const Popularity& a, const NetworkConfig& cfg);

struct Algorithm3Result {
  CachingDistribution distribution;
  WaterfillResult waterfill;
  PrunedFiles pruned;
  std::size_t candidates = 0;
  bool exhaustive = false;  // false: optimal within the sampled pool only
  double objective = 0.0;
};

/// Water-filled marginals, pruning, then LP refinement. The candidate pool is
/// exhaustive when the admissible count fits the budget; otherwise it holds
/// the decomposition of T*, swap neighbours of its best combinations and
/// combinations sampled proportionally to T*.
Algorithm3Result algorithm3(const Popularity& a, const NetworkConfig& cfg,
                            std::size_t candidate_budget = 5000, std::uint64_t seed = 1);

/// 1: top-K files everywhere; 2: K i.i.d. draws from a; 3: uniform combination.
CachingPolicy baseline(const Popularity& a, const NetworkConfig& cfg, int which);

}  // namespace mcache

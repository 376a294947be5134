#pragma once

#include <optional>
#include <vector>

#include "mcache/content.hpp"
#include "mcache/rng.hpp"

namespace mcache {

/// How each BS picks its cache content.
///
/// Combination-based policies wrap a CachingDistribution. Two baselines sit
/// outside that model and are carried as samplers: independent draws with
/// replacement (duplicates collapse, so a BS may hold fewer than K distinct
/// files) and the uniform distribution over all C(N, K) combinations, which
/// is never materialized.
class CachingPolicy {
 public:
  enum class Kind { Distribution, IndependentDraws, UniformCombination };

  static CachingPolicy from_distribution(CachingDistribution p);
  static CachingPolicy independent_draws(const Popularity& a, int cache_size);
  static CachingPolicy uniform_combination(int num_files, int cache_size);

  Kind kind() const { return kind_; }
  int num_files() const { return num_files_; }
  int cache_size() const { return cache_size_; }
  /// Set only for Kind::Distribution.
  const std::optional<CachingDistribution>& distribution() const { return dist_; }

  /// Probability that a BS stores each file.
  Marginals marginals() const;

  /// Draws one cache into `out` as sorted distinct file ids.
  void sample(Philox4x32& rng, std::vector<FileId>& out) const;

 private:
  CachingPolicy() = default;

  Kind kind_ = Kind::Distribution;
  int num_files_ = 0;
  int cache_size_ = 0;
  std::optional<CachingDistribution> dist_;
  std::vector<double> cumulative_;  // over distribution entries or popularity
  std::vector<double> popularity_;
};

}  // namespace mcache

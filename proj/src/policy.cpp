#include "mcache/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcache {

namespace {

std::size_t draw_index(Philox4x32& rng, const std::vector<double>& cumulative) {
  const double u = uniform01(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
}

}  // namespace

CachingPolicy CachingPolicy::from_distribution(CachingDistribution p) {
  CachingPolicy policy;
  policy.kind_ = Kind::Distribution;
  policy.num_files_ = p.num_files();
  policy.cache_size_ = p.cache_size();
  double acc = 0.0;
  for (const auto& e : p.entries()) {
    acc += e.prob;
    policy.cumulative_.push_back(acc);
  }
  policy.dist_ = std::move(p);
  return policy;
}

CachingPolicy CachingPolicy::independent_draws(const Popularity& a, int cache_size) {
  if (cache_size < 1) throw std::invalid_argument("independent_draws: K must be positive");
  CachingPolicy policy;
  policy.kind_ = Kind::IndependentDraws;
  policy.num_files_ = static_cast<int>(a.size());
  policy.cache_size_ = cache_size;
  policy.popularity_.assign(a.values().begin(), a.values().end());
  double acc = 0.0;
  for (double v : policy.popularity_) {
    acc += v;
    policy.cumulative_.push_back(acc);
  }
  return policy;
}

CachingPolicy CachingPolicy::uniform_combination(int num_files, int cache_size) {
  if (cache_size < 1 || cache_size > num_files) {
    throw std::invalid_argument("uniform_combination: need 1 <= K <= N");
  }
  CachingPolicy policy;
  policy.kind_ = Kind::UniformCombination;
  policy.num_files_ = num_files;
  policy.cache_size_ = cache_size;
  return policy;
}

Marginals CachingPolicy::marginals() const {
  switch (kind_) {
    case Kind::Distribution:
      return mcache::marginals(*dist_, num_files_);
    case Kind::IndependentDraws: {
      Marginals t(num_files_);
      for (int n = 0; n < num_files_; ++n) t[n] = 1.0 - std::pow(1.0 - popularity_[n], cache_size_);
      return t;
    }
    case Kind::UniformCombination:
      return Marginals(num_files_, static_cast<double>(cache_size_) / num_files_);
  }
  return {};
}

void CachingPolicy::sample(Philox4x32& rng, std::vector<FileId>& out) const {
  out.clear();
  switch (kind_) {
    case Kind::Distribution: {
      const auto files = dist_->entries()[draw_index(rng, cumulative_)].combo.files();
      out.assign(files.begin(), files.end());
      return;
    }
    case Kind::IndependentDraws:
      for (int j = 0; j < cache_size_; ++j) {
        out.push_back(static_cast<FileId>(draw_index(rng, cumulative_)));
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return;
    case Kind::UniformCombination:
      // Floyd's sampling of K distinct values from {0..N-1}
      for (int j = num_files_ - cache_size_; j < num_files_; ++j) {
        const auto t = static_cast<FileId>(uniform01(rng) * (j + 1));
        const auto pick = std::find(out.begin(), out.end(), t) == out.end() ? t
                                                                             : static_cast<FileId>(j);
        out.push_back(pick);
      }
      std::sort(out.begin(), out.end());
      return;
  }
}

}  // namespace mcache

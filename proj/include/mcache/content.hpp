#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <iterator>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mcache {

/// Zero-based file index. Text formats and the CLI print indices one-based.
using FileId = std::uint32_t;

/// Probability-sum tolerance for caching distributions and marginals.
inline constexpr double kProbabilityTol = 1e-9;

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File request distribution, sorted non-increasing and summing to one.
class Popularity {
 public:
  Popularity() = default;
  /// Validates and renormalizes when the sum is within 1e-12 of one.
  explicit Popularity(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t n) const { return probs_[n]; }
  std::span<const double> values() const { return probs_; }

 private:
  std::vector<double> probs_;
};

/// a_n proportional to n^{-gamma}, n = 1..N.
Popularity zipf(int num_files, double gamma);

/// A set of distinct files stored together at one BS. The file list is kept
/// sorted, so equal sets compare and hash equal regardless of build order.
class Combination {
 public:
  Combination() = default;
  explicit Combination(std::vector<FileId> files);
  Combination(std::initializer_list<FileId> files);

  std::size_t size() const { return files_.size(); }
  std::span<const FileId> files() const { return files_; }
  bool contains(FileId n) const;

  auto operator<=>(const Combination&) const = default;
  bool operator==(const Combination&) const = default;

 private:
  std::vector<FileId> files_;
};

struct CombinationHash {
  std::size_t operator()(const Combination& c) const noexcept;
};

/// Per-file caching probabilities T_n.
using Marginals = std::vector<double>;

/// Sparse probability vector over K-file combinations. Entries are kept in
/// canonical order with distinct keys; zero-probability entries are allowed
/// so that an optimizer can carry its candidate set.
class CachingDistribution {
 public:
  struct Entry {
    Combination combo;
    double prob = 0.0;
  };

  CachingDistribution() = default;
  /// Validates sizes, ranges and the unit sum (renormalizing within tolerance).
  CachingDistribution(int num_files, int cache_size, std::vector<Entry> entries);

  int num_files() const { return num_files_; }
  int cache_size() const { return cache_size_; }
  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Probability of a combination, zero when absent.
  double prob(const Combination& c) const;
  /// Entries with positive probability.
  std::vector<Entry> support() const;

  /// Uniform distribution over the given combinations.
  static CachingDistribution uniform(int num_files, int cache_size,
                                     std::vector<Combination> combos);
  /// K = 1 distribution from a per-file probability vector.
  static CachingDistribution from_file_probs(std::span<const double> probs);

 private:
  int num_files_ = 0;
  int cache_size_ = 0;
  std::vector<Entry> entries_;
};

/// T_n = sum of p_i over combinations containing n.
Marginals marginals(const CachingDistribution& p, int num_files);

/// Throws InfeasibleError unless every T_n lies in [0,1] and the sum is K.
void check_marginals(std::span<const double> t, int cache_size);

/// Builds a caching distribution whose marginals equal t.
///
/// Files are sorted by t descending and laid end to end on [0, K). Reading
/// the interval modulo one gives K stacked levels; every slab between
/// consecutive breakpoints is covered by exactly K distinct files, which form
/// one combination with probability equal to the slab width. The support has
/// at most N combinations.
CachingDistribution decompose_marginals(std::span<const double> t, int cache_size);

/// Lazily enumerates the K-subsets of `support` that contain `file`.
class CombinationsContaining {
 public:
  CombinationsContaining(FileId file, std::vector<FileId> support, int cache_size);

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Combination;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    const Combination& operator*() const { return current_; }
    iterator& operator++();
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& a, const iterator& b) { return a.done_ == b.done_; }

   private:
    friend class CombinationsContaining;
    explicit iterator(const CombinationsContaining* owner);
    void materialize();

    const CombinationsContaining* owner_ = nullptr;
    std::vector<std::size_t> pick_;
    Combination current_;
    bool done_ = true;
  };

  iterator begin() const { return iterator(this); }
  iterator end() const { return iterator(); }
  /// C(|support| - 1, K - 1).
  std::uint64_t count() const;

 private:
  FileId file_;
  std::vector<FileId> others_;
  int picks_;
};

CombinationsContaining combos_containing(FileId file, std::vector<FileId> support,
                                         int cache_size);

/// All K-subsets of {0..n-1}. Callers keep n small; the count is C(n, K).
std::vector<Combination> all_combinations(int num_files, int cache_size);

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Text format: header `#N=<N> K=<K>`, then one `i1,i2,...<TAB>prob` line per
/// combination with one-based sorted file indices.
void write_distribution(std::ostream& os, const CachingDistribution& p);
CachingDistribution read_distribution(std::istream& is);

}  // namespace mcache

#include "mcache/content.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace mcache {

Popularity::Popularity(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("popularity: empty catalog");
  double sum = 0.0;
  for (double a : probs_) {
    if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("popularity: entries must lie in (0,1]");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("popularity: probabilities must sum to one");
  }
  for (double& a : probs_) a /= sum;
  for (std::size_t n = 1; n < probs_.size(); ++n) {
    if (probs_[n] > probs_[n - 1] + 1e-12) throw std::invalid_argument("popularity: entries must be sorted non-increasing");
  }
}

Popularity zipf(int num_files, double gamma) {
  if (num_files < 1) throw std::invalid_argument("zipf: need at least one file");
  if (!(gamma >= 0.0)) throw std::invalid_argument("zipf: exponent must be non-negative");
  std::vector<double> a(num_files);
  for (int n = 0; n < num_files; ++n) a[n] = std::pow(static_cast<double>(n + 1), -gamma);
  const double total = std::accumulate(a.begin(), a.end(), 0.0);
  for (double& v : a) v /= total;
  return Popularity(std::move(a));
}

Combination::Combination(std::vector<FileId> files) : files_(std::move(files)) {
  std::sort(files_.begin(), files_.end());
  if (std::adjacent_find(files_.begin(), files_.end()) != files_.end()) {
    throw std::invalid_argument("combination: duplicate file");
  }
}

Combination::Combination(std::initializer_list<FileId> files)
    : Combination(std::vector<FileId>(files)) {}

bool Combination::contains(FileId n) const {
  return std::binary_search(files_.begin(), files_.end(), n);
}

std::size_t CombinationHash::operator()(const Combination& c) const noexcept {
  std::size_t h = 0xcbf29ce484222325ull;
  for (FileId f : c.files()) {
    h ^= f + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

CachingDistribution::CachingDistribution(int num_files, int cache_size, std::vector<Entry> entries)
    : num_files_(num_files), cache_size_(cache_size) {
  if (num_files < 1 || cache_size < 1 || cache_size > num_files) {
    throw std::invalid_argument("caching distribution: need 1 <= K <= N");
  }
  std::map<Combination, double> merged;
  double sum = 0.0;
  for (auto& e : entries) {
    if (e.combo.size() != static_cast<std::size_t>(cache_size)) {
      throw std::invalid_argument("caching distribution: combination size differs from K");
    }
    if (!e.combo.files().empty() && e.combo.files().back() >= static_cast<FileId>(num_files)) {
      throw std::invalid_argument("caching distribution: file index out of range");
    }
    if (e.prob < 0.0 && e.prob > -kProbabilityTol) e.prob = 0.0;
    if (!(e.prob >= 0.0 && e.prob <= 1.0 + kProbabilityTol)) {
      throw std::invalid_argument("caching distribution: probability outside [0,1]");
    }
    merged[e.combo] += e.prob;
    sum += e.prob;
  }
  if (std::abs(sum - 1.0) > kProbabilityTol) {
    throw InfeasibleError("caching distribution: probabilities sum to " + std::to_string(sum));
  }
  entries_.reserve(merged.size());
  for (auto& [combo, prob] : merged) entries_.push_back({combo, std::min(prob / sum, 1.0)});
}

double CachingDistribution::prob(const Combination& c) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), c,
                             [](const Entry& e, const Combination& key) { return e.combo < key; });
  return (it != entries_.end() && it->combo == c) ? it->prob : 0.0;
}

std::vector<CachingDistribution::Entry> CachingDistribution::support() const {
  std::vector<Entry> out;
  for (const auto& e : entries_) {
    if (e.prob > 0.0) out.push_back(e);
  }
  return out;
}

CachingDistribution CachingDistribution::uniform(int num_files, int cache_size,
                                                 std::vector<Combination> combos) {
  if (combos.empty()) throw std::invalid_argument("uniform: no combinations");
  const double w = 1.0 / static_cast<double>(combos.size());
  std::vector<Entry> entries;
  entries.reserve(combos.size());
  for (auto& c : combos) entries.push_back({std::move(c), w});
  return CachingDistribution(num_files, cache_size, std::move(entries));
}

CachingDistribution CachingDistribution::from_file_probs(std::span<const double> probs) {
  std::vector<Entry> entries;
  entries.reserve(probs.size());
  for (std::size_t n = 0; n < probs.size(); ++n) {
    entries.push_back({Combination{static_cast<FileId>(n)}, probs[n]});
  }
  return CachingDistribution(static_cast<int>(probs.size()), 1, std::move(entries));
}

Marginals marginals(const CachingDistribution& p, int num_files) {
  Marginals t(num_files, 0.0);
  for (const auto& e : p.entries()) {
    for (FileId f : e.combo.files()) t[f] += e.prob;
  }
  return t;
}

void check_marginals(std::span<const double> t, int cache_size) {
  double sum = 0.0;
  for (double v : t) {
    if (!(v >= -kProbabilityTol && v <= 1.0 + kProbabilityTol)) {
      throw InfeasibleError("marginals: entry outside [0,1]");
    }
    sum += v;
  }
  if (std::abs(sum - cache_size) > kProbabilityTol) {
    throw InfeasibleError("marginals: sum is " + std::to_string(sum) + ", expected " +
                          std::to_string(cache_size));
  }
}

CachingDistribution decompose_marginals(std::span<const double> t, int cache_size) {
  check_marginals(t, cache_size);
  const int n_files = static_cast<int>(t.size());
  if (cache_size > n_files) throw InfeasibleError("decompose: K exceeds N");

  std::vector<double> level(t.begin(), t.end());
  double sum = 0.0;
  for (double& v : level) {
    v = std::clamp(v, 0.0, 1.0);
    sum += v;
  }
  for (double& v : level) v *= cache_size / sum;

  std::vector<FileId> order;
  for (int n = 0; n < n_files; ++n) {
    if (level[n] > 0.0) order.push_back(static_cast<FileId>(n));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](FileId x, FileId y) { return level[x] > level[y]; });

  // start[j] is where the j-th file begins on [0, K).
  std::vector<double> start(order.size() + 1, 0.0);
  for (std::size_t j = 0; j < order.size(); ++j) {
    start[j + 1] = start[j] + std::min(level[order[j]], 1.0);
  }

  constexpr double kMergeTol = 1e-12;
  std::vector<double> breaks{0.0, 1.0};
  for (std::size_t j = 1; j < order.size(); ++j) {
    const double frac = start[j] - std::floor(start[j]);
    if (frac > kMergeTol && frac < 1.0 - kMergeTol) breaks.push_back(frac);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double x, double y) { return y - x <= kMergeTol; }),
               breaks.end());

  std::vector<std::size_t> cursor(cache_size, 0);
  std::map<Combination, double> slabs;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double width = breaks[s + 1] - breaks[s];
    if (width <= 0.0) continue;
    const double mid = 0.5 * (breaks[s] + breaks[s + 1]);
    std::vector<FileId> files;
    files.reserve(cache_size);
    for (int q = 0; q < cache_size; ++q) {
      const double pos = q + mid;
      std::size_t& j = cursor[q];
      while (j + 1 < order.size() && start[j + 1] <= pos) ++j;
      files.push_back(order[j]);
    }
    slabs[Combination(std::move(files))] += width;
  }

  std::vector<CachingDistribution::Entry> entries;
  entries.reserve(slabs.size());
  for (auto& [combo, w] : slabs) entries.push_back({combo, w});
  return CachingDistribution(n_files, cache_size, std::move(entries));
}

CombinationsContaining::CombinationsContaining(FileId file, std::vector<FileId> support,
                                               int cache_size)
    : file_(file), picks_(cache_size - 1) {
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  if (!std::binary_search(support.begin(), support.end(), file)) {
    throw std::invalid_argument("combos_containing: file not in support");
  }
  for (FileId f : support) {
    if (f != file) others_.push_back(f);
  }
  if (cache_size < 1) throw std::invalid_argument("combos_containing: K must be positive");
}

std::uint64_t CombinationsContaining::count() const { return binomial(others_.size(), picks_); }

CombinationsContaining::iterator::iterator(const CombinationsContaining* owner)
    : owner_(owner), done_(false) {
  const auto picks = static_cast<std::size_t>(owner->picks_);
  if (picks > owner->others_.size()) {
    done_ = true;
    return;
  }
  pick_.resize(picks);
  std::iota(pick_.begin(), pick_.end(), 0);
  materialize();
}

void CombinationsContaining::iterator::materialize() {
  std::vector<FileId> files;
  files.reserve(pick_.size() + 1);
  files.push_back(owner_->file_);
  for (std::size_t idx : pick_) files.push_back(owner_->others_[idx]);
  current_ = Combination(std::move(files));
}

CombinationsContaining::iterator& CombinationsContaining::iterator::operator++() {
  const std::size_t m = owner_->others_.size();
  const std::size_t r = pick_.size();
  std::size_t i = r;
  while (i > 0 && pick_[i - 1] == m - r + i - 1) --i;
  if (i == 0) {
    done_ = true;
    return *this;
  }
  ++pick_[i - 1];
  for (std::size_t j = i; j < r; ++j) pick_[j] = pick_[j - 1] + 1;
  materialize();
  return *this;
}

CombinationsContaining combos_containing(FileId file, std::vector<FileId> support,
                                         int cache_size) {
  return CombinationsContaining(file, std::move(support), cache_size);
}

std::vector<Combination> all_combinations(int num_files, int cache_size) {
  std::vector<Combination> out;
  if (cache_size < 1 || cache_size > num_files) return out;
  std::vector<FileId> pick(cache_size);
  std::iota(pick.begin(), pick.end(), 0u);
  const auto n = static_cast<FileId>(num_files);
  const auto r = static_cast<FileId>(cache_size);
  while (true) {
    out.emplace_back(pick);
    FileId i = r;
    while (i > 0 && pick[i - 1] == n - r + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (FileId j = i; j < r; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays integral at every step
    const unsigned __int128 next = static_cast<unsigned __int128>(r) * (n - k + i) / i;
    if (next > UINT64_MAX) return UINT64_MAX;
    r = static_cast<std::uint64_t>(next);
  }
  return r;
}

void write_distribution(std::ostream& os, const CachingDistribution& p) {
  os << "#N=" << p.num_files() << " K=" << p.cache_size() << '\n';
  const auto old_precision = os.precision(17);
  for (const auto& e : p.entries()) {
    bool first = true;
    for (FileId f : e.combo.files()) {
      if (!first) os << ',';
      os << f + 1;
      first = false;
    }
    os << '\t' << e.prob << '\n';
  }
  os.precision(old_precision);
}

CachingDistribution read_distribution(std::istream& is) {
  std::string line;
  int n_files = -1;
  int cache = -1;
  std::vector<CachingDistribution::Entry> entries;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (n_files < 0 && std::sscanf(line.c_str(), "#N=%d K=%d", &n_files, &cache) != 2) {
        throw std::invalid_argument("distribution line " + std::to_string(line_no) +
                                    ": malformed header");
      }
      continue;
    }
    if (n_files < 0) throw std::invalid_argument("distribution: missing #N= K= header");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::invalid_argument("distribution line " + std::to_string(line_no) + ": missing tab");
    }
    std::vector<FileId> files;
    std::stringstream idx(line.substr(0, tab));
    std::string tok;
    while (std::getline(idx, tok, ',')) {
      const long v = std::stol(tok);
      if (v < 1 || v > n_files) {
        throw std::invalid_argument("distribution line " + std::to_string(line_no) +
                                    ": file index out of range");
      }
      files.push_back(static_cast<FileId>(v - 1));
    }
    entries.push_back({Combination(std::move(files)), std::stod(line.substr(tab + 1))});
  }
  if (n_files < 0) throw std::invalid_argument("distribution: empty input");
  return CachingDistribution(n_files, cache, std::move(entries));
}

}  // namespace mcache

#include "mcache/analysis.hpp"

#include <cmath>
#include <algorithm>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "mcache/simd/kernels.hpp"

namespace mcache {

namespace {

// Voronoi cell-size approximation constants for the idle probability of a file.
constexpr double kCellShape = 3.5;
constexpr double kCellPower = 4.5;

NetworkConfig with_catalog(NetworkConfig cfg, int num_files, int cache_size) {
  cfg.num_files = num_files;
  cfg.cache_size = cache_size;
  return cfg;
}

void check_catalog(const Popularity& a, int num_files) {
  if (a.size() != static_cast<std::size_t>(num_files)) {
    throw std::invalid_argument("popularity size differs from the catalog size");
  }
}

/// Pmf of 1 + (number of busy files among `others`).
LoadPmf pmf_of(std::span<const double> busy_others) {
  LoadPmf pmf(busy_others.size() + 1);
  simd::poisson_binomial(busy_others, pmf);
  return pmf;
}

}  // namespace

double busy_probability(double a_m, double t_m, const NetworkConfig& cfg) {
  if (t_m <= 0.0) return 1.0;
  const double x = a_m * cfg.user_density / (kCellShape * t_m * cfg.bs_density);
  return -std::expm1(-kCellPower * std::log1p(x));
}

namespace {

double busy_slope_of(double a_m, double t_m, const NetworkConfig& cfg) {
  if (t_m <= 0.0) return 0.0;
  const double coef = a_m * cfg.user_density / (kCellShape * cfg.bs_density);
  const double w = 1.0 + coef / t_m;
  return -kCellPower * std::pow(w, -kCellPower - 1.0) * coef / (t_m * t_m);
}

}  // namespace

SuccessModel::SuccessModel(const Popularity& a, const NetworkConfig& cfg, Marginals t)
    : a_(a),
      kernel_(cfg, cfg.cache_size),
      t_(std::move(t)),
      cache_size_(cfg.cache_size),
      busy_(t_.size()),
      busy_slope_(t_.size()),
      rows_(t_.size()) {
  check_catalog(a_, static_cast<int>(t_.size()));
  for (std::size_t m = 0; m < t_.size(); ++m) {
    busy_[m] = busy_probability(a_[m], t_[m], cfg);
    busy_slope_[m] = busy_slope_of(a_[m], t_[m], cfg);
  }
}

const std::vector<FkTerms>& SuccessModel::row(FileId n) const {
  auto& r = rows_.at(n);
  if (r.empty()) {
    const double x = std::clamp(t_[n], 0.0, 1.0);
    r.reserve(cache_size_);
    for (int k = 1; k <= cache_size_; ++k) r.push_back(kernel_.terms(x, k));
  }
  return r;
}

LoadPmf SuccessModel::conditional_load(FileId n, const Combination& i) const {
  std::vector<double> others;
  others.reserve(i.size());
  for (FileId m : i.files()) {
    if (m != n) others.push_back(busy_[m]);
  }
  return pmf_of(others);
}

double SuccessModel::combination_value(const Combination& i) const {
  double total = 0.0;
  for (FileId n : i.files()) {
    const LoadPmf g = conditional_load(n, i);
    const auto& fk = row(n);
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) s += g[k] * fk[k].ratio;
    total += a_[n] * s;
  }
  return total;
}

LoadPmf load_pmf(FileId n, const Combination& i, std::span<const double> t, const Popularity& a,
                 const NetworkConfig& cfg) {
  if (!i.contains(n)) throw std::invalid_argument("load_pmf: combination does not contain file");
  check_catalog(a, static_cast<int>(t.size()));
  std::vector<double> others;
  for (FileId m : i.files()) {
    if (!(t[m] > 0.0)) throw std::domain_error("load_pmf: zero marginal for a cached file");
    if (m != n) others.push_back(busy_probability(a[m], t[m], cfg));
  }
  return pmf_of(others);
}

LoadPmf load_pmf_marginal(FileId n, const CachingDistribution& p, std::span<const double> t,
                          const Popularity& a, const NetworkConfig& cfg) {
  if (!(t[n] > 0.0)) throw std::domain_error("load_pmf_marginal: file has zero marginal");
  LoadPmf mix(p.cache_size(), 0.0);
  for (const auto& e : p.entries()) {
    if (e.prob <= 0.0 || !e.combo.contains(n)) continue;
    const LoadPmf g = load_pmf(n, e.combo, t, a, cfg);
    const double w = e.prob / t[n];
    for (std::size_t k = 0; k < mix.size(); ++k) mix[k] += w * g[k];
  }
  return mix;
}

EvalReport q1(const CachingDistribution& p, const Popularity& a, const NetworkConfig& cfg) {
  if (p.cache_size() != 1) throw std::invalid_argument("q1: requires K = 1");
  check_catalog(a, p.num_files());
  const CoverageKernel kernel(cfg, 1);
  EvalReport report;
  report.marginals = marginals(p, p.num_files());
  report.per_file.resize(p.num_files());
  for (int n = 0; n < p.num_files(); ++n) {
    report.per_file[n] = kernel.f(std::clamp(report.marginals[n], 0.0, 1.0), 1);
    report.q += a[n] * report.per_file[n];
  }
  return report;
}

double q1_inf(const CachingDistribution& p, const Popularity& a, const NetworkConfig& cfg) {
  if (p.cache_size() != 1) throw std::invalid_argument("q1_inf: requires K = 1");
  const Marginals t = marginals(p, p.num_files());
  return qK_inf(t, a, with_catalog(cfg, p.num_files(), 1));
}

EvalReport qK(const CachingDistribution& p, const Popularity& a, const NetworkConfig& cfg,
              bool with_loads) {
  const int n_files = p.num_files();
  const int cache = p.cache_size();
  const SuccessModel model(a, with_catalog(cfg, n_files, cache), marginals(p, n_files));
  const Marginals& t = model.marginals();

  std::vector<double> acc(n_files, 0.0);
  std::vector<LoadPmf> loads(with_loads ? n_files : 0);
  for (const auto& e : p.entries()) {
    if (e.prob <= 0.0) continue;
    for (FileId n : e.combo.files()) {
      const LoadPmf g = model.conditional_load(n, e.combo);
      const auto& fk = model.row(n);
      double s = 0.0;
      for (int k = 0; k < cache; ++k) s += g[k] * fk[k].value;
      acc[n] += e.prob * s;
      if (with_loads) {
        auto& mix = loads[n];
        if (mix.empty()) mix.assign(cache, 0.0);
        for (int k = 0; k < cache; ++k) mix[k] += e.prob * g[k];
      }
    }
  }

  EvalReport report;
  report.marginals = t;
  report.per_file.assign(n_files, 0.0);
  for (int n = 0; n < n_files; ++n) {
    if (!(t[n] > 0.0)) continue;
    report.per_file[n] = acc[n] / t[n];
    report.q += a[n] * report.per_file[n];
    if (with_loads) {
      for (double& v : loads[n]) v /= t[n];
    }
  }
  report.per_load = std::move(loads);
  return report;
}

double qK_inf(std::span<const double> t, const Popularity& a, const NetworkConfig& cfg) {
  check_catalog(a, static_cast<int>(t.size()));
  const CConstants c = c_constants(cfg.cache_size, cfg);
  double q = 0.0;
  for (std::size_t n = 0; n < t.size(); ++n) q += a[n] * t[n] / (c.c2 + c.c1 * t[n]);
  return q;
}

std::vector<double> grad_qK(const CachingDistribution& p, const Popularity& a,
                            const NetworkConfig& cfg, std::span<const Combination> candidates) {
  const SuccessModel model(a, with_catalog(cfg, p.num_files(), p.cache_size()),
                           marginals(p, p.num_files()));
  for (const auto& c : candidates) {
    for (FileId n : c.files()) {
      if (!(model.marginals()[n] > 0.0)) {
        throw SingularMarginalError("grad_qK: file " + std::to_string(n + 1) +
                                    " has zero caching probability");
      }
    }
  }
  return detail::grad_qK_extended(p, model, candidates);
}

namespace detail {

std::vector<double> grad_qK_extended(const CachingDistribution& p, const SuccessModel& model,
                                     std::span<const Combination> candidates) {
  const Marginals& t = model.marginals();
  const Popularity& a = model.popularity();
  const int cache = model.cache_size();

  // d q / d T_m through every support combination, accumulated per file.
  std::vector<double> through_marginal(t.size(), 0.0);
  std::vector<double> scratch;
  for (const auto& e : p.entries()) {
    if (e.prob <= 0.0) continue;
    const auto files = e.combo.files();
    for (FileId n : files) {
      const auto& fk = model.row(n);
      const LoadPmf g = model.conditional_load(n, e.combo);
      // Own marginal: d/dT_n [ (a_n / T_n) f_k(T_n) ] = a_n (f_k' - f_k / T_n) / T_n
      double own = 0.0;
      for (int k = 0; k < cache; ++k) own += g[k] * (fk[k].derivative - fk[k].ratio);
      through_marginal[n] += e.prob * a[n] * own / t[n];

      // Other files of the combination move the load pmf through their busy
      // probability; rebuild the pmf without m instead of dividing it out.
      for (FileId m : files) {
        if (m == n || model.busy_slope(m) == 0.0) continue;
        scratch.clear();
        for (FileId j : files) {
          if (j != n && j != m) scratch.push_back(model.busy(j));
        }
        LoadPmf h(scratch.size() + 1);
        simd::poisson_binomial(scratch, h);
        double cross = 0.0;
        for (int k = 0; k < cache; ++k) {
          const double up = k >= 1 ? h[k - 1] : 0.0;
          const double stay = k < static_cast<int>(h.size()) ? h[k] : 0.0;
          cross += fk[k].ratio * (up - stay);
        }
        through_marginal[m] += e.prob * a[n] * cross * model.busy_slope(m);
      }
    }
  }

  std::vector<double> grad(candidates.size(), 0.0);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double g = model.combination_value(candidates[c]);
    for (FileId m : candidates[c].files()) g += through_marginal[m];
    grad[c] = g;
  }
  return grad;
}

}  // namespace detail

std::optional<EvalReport> evaluate_policy(const CachingPolicy& policy, const Popularity& a,
                                          const NetworkConfig& cfg) {
  switch (policy.kind()) {
    case CachingPolicy::Kind::Distribution:
      return qK(*policy.distribution(), a, cfg);
    case CachingPolicy::Kind::IndependentDraws:
      return std::nullopt;
    case CachingPolicy::Kind::UniformCombination:
      break;
  }
  // Every combination equally likely: the load pmf of file n averages the
  // Poisson-binomial pmf over all (K-1)-subsets of the other files. Track
  // subset size s and busy count j jointly while adding files one by one.
  const int n_files = policy.num_files();
  const int cache = policy.cache_size();
  check_catalog(a, n_files);
  const NetworkConfig local = with_catalog(cfg, n_files, cache);
  const double t_uniform = static_cast<double>(cache) / n_files;
  const SuccessModel model(a, local, Marginals(n_files, t_uniform));
  const int picks = cache - 1;
  const long double subsets = static_cast<long double>(binomial(n_files - 1, picks));

  EvalReport report;
  report.marginals = model.marginals();
  report.per_file.assign(n_files, 0.0);
  std::vector<long double> table((picks + 1) * (picks + 1));
  auto at = [&](int s, int j) -> long double& { return table[s * (picks + 1) + j]; };
  for (int n = 0; n < n_files; ++n) {
    std::fill(table.begin(), table.end(), 0.0L);
    at(0, 0) = 1.0L;
    for (int m = 0; m < n_files; ++m) {
      if (m == n) continue;
      const long double r = model.busy(m);
      for (int s = picks; s >= 1; --s) {
        for (int j = s; j >= 0; --j) {
          long double add = (1.0L - r) * at(s - 1, j);
          if (j >= 1) add += r * at(s - 1, j - 1);
          at(s, j) += add;
        }
      }
    }
    const auto& fk = model.row(static_cast<FileId>(n));
    double s = 0.0;
    for (int j = 0; j <= picks; ++j) s += static_cast<double>(at(picks, j) / subsets) * fk[j].value;
    report.per_file[n] = s;
    report.q += a[n] * s;
  }
  return report;
}

void write_report_csv(std::ostream& os, const EvalReport& report, const Popularity& a) {
  const auto old = os.precision(12);
  os << "file,a_n,T_n,q_n\n";
  for (std::size_t n = 0; n < report.per_file.size(); ++n) {
    os << n + 1 << ',' << a[n] << ',' << report.marginals[n] << ',' << report.per_file[n] << '\n';
  }
  os << "total,1," << std::accumulate(report.marginals.begin(), report.marginals.end(), 0.0) << ','
     << report.q << '\n';
  os.precision(old);
}

}  // namespace mcache

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mcache/content.hpp"
#include "mcache/math_kernel.hpp"
#include "mcache/network.hpp"
#include "mcache/policy.hpp"

namespace mcache {

/// probs[k-1] = Pr[file load = k], k = 1..K.
using LoadPmf = std::vector<double>;

class SingularMarginalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct EvalReport {
  double q = 0.0;
  std::vector<double> per_file;      // q_{K,n}; zero for uncached files
  Marginals marginals;
  std::vector<LoadPmf> per_load;     // filled on request; empty pmf for uncached files
};

/// Probability that another file m of the serving BS's cache is requested by
/// at least one of its users, 1 - (1 + a_m lambda_u / (3.5 T_m lambda_b))^{-4.5}.
/// Tends to one as T_m -> 0.
double busy_probability(double a_m, double t_m, const NetworkConfig& cfg);

/// Per-scenario tables shared by the evaluators and the optimizers: busy
/// probabilities of every file and f_k(T_n) rows, the latter computed on
/// first use. Not safe for concurrent use.
class SuccessModel {
 public:
  SuccessModel(const Popularity& a, const NetworkConfig& cfg, Marginals t);

  const Marginals& marginals() const { return t_; }
  const Popularity& popularity() const { return a_; }
  int cache_size() const { return cache_size_; }
  double busy(FileId m) const { return busy_[m]; }
  /// d busy / d T_m; zero at T_m = 0.
  double busy_slope(FileId m) const { return busy_slope_[m]; }
  /// f_k(T_n), f_k'(T_n) and f_k(T_n)/T_n for k = 1..K.
  const std::vector<FkTerms>& row(FileId n) const;

  /// Load pmf of file n given the serving BS stores combination i (n in i).
  LoadPmf conditional_load(FileId n, const Combination& i) const;
  /// sum_{n in i} (a_n / T_n) sum_k Pr[load = k | i] f_k(T_n)
  double combination_value(const Combination& i) const;

 private:
  Popularity a_;
  CoverageKernel kernel_;
  Marginals t_;
  int cache_size_;
  std::vector<double> busy_;
  std::vector<double> busy_slope_;
  mutable std::vector<std::vector<FkTerms>> rows_;
};

/// Conditional file-load pmf of file n when the serving BS stores combination i.
LoadPmf load_pmf(FileId n, const Combination& i, std::span<const double> t, const Popularity& a,
                 const NetworkConfig& cfg);

/// Mixture of load_pmf over the combinations of p containing n, weighted p_i / T_n.
LoadPmf load_pmf_marginal(FileId n, const CachingDistribution& p, std::span<const double> t,
                          const Popularity& a, const NetworkConfig& cfg);

/// K = 1 success probability, sum_n a_n f_1(p_n).
EvalReport q1(const CachingDistribution& p, const Popularity& a, const NetworkConfig& cfg);

/// Infinite-SNR K = 1 closed form.
double q1_inf(const CachingDistribution& p, const Popularity& a, const NetworkConfig& cfg);

/// General-K success probability with the approximate load pmf.
EvalReport qK(const CachingDistribution& p, const Popularity& a, const NetworkConfig& cfg,
              bool with_loads = false);

/// Infinite-SNR, infinite-user-density closed form sum_n a_n T_n / (c2_K + c1_K T_n).
double qK_inf(std::span<const double> t, const Popularity& a, const NetworkConfig& cfg);

/// Partial derivatives of qK with respect to the probabilities of `candidates`.
/// Throws SingularMarginalError when a file of some candidate has T_n = 0.
std::vector<double> grad_qK(const CachingDistribution& p, const Popularity& a,
                            const NetworkConfig& cfg, std::span<const Combination> candidates);

/// Analytical success probability of a caching policy. Uniform-combination
/// policies are evaluated exactly without enumerating C(N, K); independent
/// draws with replacement fall outside the model and yield nullopt.
std::optional<EvalReport> evaluate_policy(const CachingPolicy& policy, const Popularity& a,
                                          const NetworkConfig& cfg);

/// `file,a_n,T_n,q_n` rows (one-based file ids) followed by a `total` row.
void write_report_csv(std::ostream& os, const EvalReport& report, const Popularity& a);

namespace detail {
/// Gradient with the continuous extension at zero marginals (f_k(x)/x and the
/// busy probability both have finite limits). Used by gradient projection,
/// whose iterates may sit on faces where a file is uncached.
std::vector<double> grad_qK_extended(const CachingDistribution& p, const SuccessModel& model,
                                     std::span<const Combination> candidates);
}  // namespace detail

}  // namespace mcache

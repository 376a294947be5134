#include "mcache/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "mcache/simd/kernels.hpp"

namespace mcache {

void SimConfig::validate() const {
  if (!(window_side > 0.0)) throw ConfigError("window_side must be positive");
  if (realizations < 1) throw ConfigError("realizations must be at least 1");
}

namespace {

double exp1(Philox4x32& rng) { return -std::log1p(-uniform01(rng)); }

FileId draw_file(Philox4x32& rng, const std::vector<double>& cumulative) {
  const double u = uniform01(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<FileId>(std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1));
}

std::vector<double> cumulative_of(const Popularity& a) {
  std::vector<double> c(a.size());
  double acc = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) c[n] = acc += a[n];
  return c;
}

bool holds(const std::vector<FileId>& cache, FileId n) {
  return std::binary_search(cache.begin(), cache.end(), n);
}

Realization sample_with(const CachingPolicy& policy, const std::vector<double>& cumulative,
                        const NetworkConfig& cfg, const SimConfig& sim, Philox4x32& rng) {
  Realization r;
  r.side = sim.window_side;
  r.period = sim.boundary == Boundary::Toroidal ? sim.window_side : 0.0;
  const double area = sim.window_side * sim.window_side;

  std::poisson_distribution<std::uint64_t> bs_count(cfg.bs_density * area);
  const std::size_t nb = bs_count(rng);
  r.bs_x.resize(nb);
  r.bs_y.resize(nb);
  r.bs_cache.resize(nb);
  r.fading.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    r.bs_x[b] = uniform01(rng) * sim.window_side;
    r.bs_y[b] = uniform01(rng) * sim.window_side;
    policy.sample(rng, r.bs_cache[b]);
    r.fading[b] = exp1(rng);
  }

  r.typical_request = sim.forced_request ? *sim.forced_request : draw_file(rng, cumulative);

  std::poisson_distribution<std::uint64_t> user_count(cfg.user_density * area);
  const std::size_t nu = user_count(rng);
  r.user_x.resize(nu);
  r.user_y.resize(nu);
  r.user_request.resize(nu);
  for (std::size_t u = 0; u < nu; ++u) {
    r.user_x[u] = uniform01(rng) * sim.window_side;
    r.user_y[u] = uniform01(rng) * sim.window_side;
    r.user_request[u] = draw_file(rng, cumulative);
  }
  return r;
}

}  // namespace

Realization sample_realization(const CachingPolicy& policy, const Popularity& a,
                               const NetworkConfig& cfg, const SimConfig& sim, Philox4x32& rng) {
  sim.validate();
  if (a.size() != static_cast<std::size_t>(policy.num_files())) {
    throw std::invalid_argument("sample_realization: popularity size differs from the policy");
  }
  return sample_with(policy, cumulative_of(a), cfg, sim, rng);
}

TypicalOutcome evaluate_typical_user(const Realization& r, const NetworkConfig& cfg,
                                     bool measure_unicast) {
  TypicalOutcome out;
  const std::size_t nb = r.bs_x.size();
  const double cx = 0.5 * r.side;
  const double cy = 0.5 * r.side;
  const FileId n = r.typical_request;

  std::vector<double> d2(nb);
  simd::squared_distances(r.bs_x, r.bs_y, cx, cy, r.period, d2);
  std::size_t serving = nb;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < nb; ++b) {
    if (d2[b] < best && holds(r.bs_cache[b], n)) {
      best = d2[b];
      serving = b;
    }
  }
  if (serving == nb) return out;
  out.served = true;
  out.distance = std::sqrt(best);

  const double half_alpha = 0.5 * cfg.path_loss;
  const double signal = r.fading[serving] * std::pow(best, -half_alpha);
  d2[serving] = std::numeric_limits<double>::infinity();
  const double interference = simd::interference_sum(d2, r.fading, half_alpha);
  out.sinr = signal / (interference + cfg.snr.noise_to_power());

  // Users of the serving BS: those requesting a file it stores with no other
  // BS storing that file strictly closer.
  const auto& cache = r.bs_cache[serving];
  const double sx = r.bs_x[serving];
  const double sy = r.bs_y[serving];
  std::vector<std::vector<double>> rival_x(cache.size()), rival_y(cache.size());
  for (std::size_t b = 0; b < nb; ++b) {
    if (b == serving) continue;
    const auto& other = r.bs_cache[b];
    for (std::size_t j = 0; j < cache.size(); ++j) {
      if (holds(other, cache[j])) {
        rival_x[j].push_back(r.bs_x[b]);
        rival_y[j].push_back(r.bs_y[b]);
      }
    }
  }
  std::vector<char> busy(cache.size(), 0);
  int users = 1;
  for (std::size_t u = 0; u < r.user_request.size(); ++u) {
    const auto it = std::lower_bound(cache.begin(), cache.end(), r.user_request[u]);
    if (it == cache.end() || *it != r.user_request[u]) continue;
    const std::size_t j = static_cast<std::size_t>(it - cache.begin());
    if (busy[j] && !measure_unicast) continue;
    double dx = std::abs(r.user_x[u] - sx);
    double dy = std::abs(r.user_y[u] - sy);
    if (r.period > 0.0) {
      dx = std::min(dx, r.period - dx);
      dy = std::min(dy, r.period - dy);
    }
    if (simd::any_within(rival_x[j], rival_y[j], r.user_x[u], r.user_y[u], r.period,
                         dx * dx + dy * dy)) {
      continue;
    }
    busy[j] = 1;
    ++users;
  }
  int load = 0;
  for (std::size_t j = 0; j < cache.size(); ++j) load += busy[j] || cache[j] == n;
  out.file_load = load;

  const double ratio = cfg.rate_ratio();
  out.multicast = out.sinr >= std::exp2(load * ratio) - 1.0;
  if (measure_unicast) {
    out.user_load = users;
    out.unicast = out.sinr >= std::exp2(users * ratio) - 1.0;
  }
  return out;
}

McEstimate binomial_estimate(std::uint64_t successes, std::uint64_t trials,
                             std::uint64_t n_effective) {
  McEstimate e;
  if (trials == 0) return e;
  e.q_hat = static_cast<double>(successes) / static_cast<double>(trials);
  e.half_width_95 = 1.96 * std::sqrt(e.q_hat * (1.0 - e.q_hat) / static_cast<double>(trials));
  e.n_effective = n_effective;
  return e;
}

namespace {

struct Tally {
  std::uint64_t served = 0;
  std::uint64_t multicast = 0;
  std::uint64_t unicast = 0;
  std::vector<std::uint64_t> requests, successes, loads;
  std::vector<double> distances;

  Tally(std::size_t files, std::size_t max_load)
      : requests(files), successes(files), loads(max_load + 1) {}

  void merge(const Tally& o) {
    served += o.served;
    multicast += o.multicast;
    unicast += o.unicast;
    for (std::size_t i = 0; i < requests.size(); ++i) {
      requests[i] += o.requests[i];
      successes[i] += o.successes[i];
    }
    for (std::size_t i = 0; i < loads.size(); ++i) loads[i] += o.loads[i];
    distances.insert(distances.end(), o.distances.begin(), o.distances.end());
  }
};

}  // namespace

McResult monte_carlo(const CachingPolicy& policy, const Popularity& a, const NetworkConfig& cfg,
                     const SimConfig& sim, unsigned jobs) {
  sim.validate();
  if (a.size() != static_cast<std::size_t>(policy.num_files())) {
    throw std::invalid_argument("monte_carlo: popularity size differs from the policy");
  }
  if (sim.forced_request && *sim.forced_request >= a.size()) {
    throw std::invalid_argument("monte_carlo: forced request out of range");
  }
  const std::vector<double> cumulative = cumulative_of(a);
  const std::size_t files = a.size();
  const std::size_t max_load = static_cast<std::size_t>(policy.cache_size());

  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(
                                                   std::min<std::uint64_t>(sim.realizations, 1024))));
  std::vector<Tally> tallies(jobs, Tally(files, max_load));
  auto work = [&](unsigned w) {
    const std::uint64_t begin = sim.realizations * w / jobs;
    const std::uint64_t end = sim.realizations * (w + 1) / jobs;
    Tally& t = tallies[w];
    for (std::uint64_t i = begin; i < end; ++i) {
      Philox4x32 rng(sim.seed, i);
      const Realization r = sample_with(policy, cumulative, cfg, sim, rng);
      const TypicalOutcome o = evaluate_typical_user(r, cfg, sim.measure_unicast);
      ++t.requests[r.typical_request];
      if (!o.served) continue;
      ++t.served;
      t.multicast += o.multicast;
      t.unicast += o.unicast;
      t.successes[r.typical_request] += o.multicast;
      ++t.loads[std::min<std::size_t>(o.file_load, max_load)];
      if (sim.diagnostics) t.distances.push_back(o.distance);
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
  }
  Tally total(files, max_load);
  for (const auto& t : tallies) total.merge(t);

  McResult out;
  out.realizations = sim.realizations;
  out.seed = sim.seed;
  out.multicast = binomial_estimate(total.multicast, sim.realizations, total.served);
  if (sim.measure_unicast) out.unicast = binomial_estimate(total.unicast, sim.realizations, total.served);
  out.requests = std::move(total.requests);
  out.successes = std::move(total.successes);
  out.load_histogram = std::move(total.loads);
  out.distances = std::move(total.distances);
  return out;
}

void write_mc_csv(std::ostream& os, const McResult& result) {
  const auto old = os.precision(10);
  os << "seed,realizations,q_multicast,ci,q_unicast,ci,n_effective\n";
  os << result.seed << ',' << result.realizations << ',' << result.multicast.q_hat << ','
     << result.multicast.half_width_95 << ',';
  if (result.unicast) os << result.unicast->q_hat << ',' << result.unicast->half_width_95;
  else os << ",";
  os << ',' << result.multicast.n_effective << '\n';
  os.precision(old);
}

}  // namespace mcache

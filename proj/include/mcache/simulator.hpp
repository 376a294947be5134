#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mcache/content.hpp"
#include "mcache/network.hpp"
#include "mcache/policy.hpp"
#include "mcache/rng.hpp"

namespace mcache {

enum class Boundary { Plain, Toroidal };

struct SimConfig {
  double window_side = 100.0;
  std::uint64_t realizations = 100000;
  std::uint64_t seed = 1;
  Boundary boundary = Boundary::Plain;
  bool measure_unicast = true;
  /// Fix the typical user's request instead of drawing it from the popularity.
  std::optional<FileId> forced_request;
  /// Keep per-realization serving distances and file loads.
  bool diagnostics = false;

  void validate() const;
};

/// One draw of the network inside the square window [0, side)^2. The typical
/// user sits at the centre and is not part of the user arrays.
struct Realization {
  std::vector<double> bs_x, bs_y;
  std::vector<std::vector<FileId>> bs_cache;  // sorted distinct files
  std::vector<double> fading;                 // Exp(1) power towards the typical user
  std::vector<double> user_x, user_y;
  std::vector<FileId> user_request;
  FileId typical_request = 0;
  double side = 0.0;
  double period = 0.0;  // > 0 for toroidal distances
};

Realization sample_realization(const CachingPolicy& policy, const Popularity& a,
                               const NetworkConfig& cfg, const SimConfig& sim, Philox4x32& rng);

struct TypicalOutcome {
  bool served = false;  // some BS in the window stores the request
  bool multicast = false;
  bool unicast = false;
  int file_load = 0;    // K_{n,0}
  int user_load = 0;    // L_{n,0}; zero when unicast is not measured
  double distance = 0.0;
  double sinr = 0.0;
};

TypicalOutcome evaluate_typical_user(const Realization& r, const NetworkConfig& cfg,
                                     bool measure_unicast = true);

struct McEstimate {
  double q_hat = 0.0;
  double half_width_95 = 0.0;
  std::uint64_t n_effective = 0;
};

struct McResult {
  McEstimate multicast;
  std::optional<McEstimate> unicast;
  std::uint64_t realizations = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> requests;   // per file
  std::vector<std::uint64_t> successes;  // per file, multicast
  std::vector<std::uint64_t> load_histogram;  // index k = file load, served realizations
  std::vector<double> distances;         // served realizations, index order (diagnostics)
};

/// Success frequency over sim.realizations independent realizations. The
/// realization with index r draws from Philox stream (seed, r), so the result
/// does not depend on `jobs`.
McResult monte_carlo(const CachingPolicy& policy, const Popularity& a, const NetworkConfig& cfg,
                     const SimConfig& sim, unsigned jobs = 1);

McEstimate binomial_estimate(std::uint64_t successes, std::uint64_t trials,
                             std::uint64_t n_effective);

/// `seed,realizations,q_multicast,ci,q_unicast,ci,n_effective` header and one row.
void write_mc_csv(std::ostream& os, const McResult& result);

}  // namespace mcache

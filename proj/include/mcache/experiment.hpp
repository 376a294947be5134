#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcache/content.hpp"
#include "mcache/network.hpp"
#include "mcache/simulator.hpp"

namespace mcache {

/// Raised by validate_config with every violation found in a document.
class SpecError : public ConfigError {
 public:
  explicit SpecError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

enum class Mode { Analyze, Optimize, Simulate, Sweep, Reproduce };

struct ExperimentSpec {
  Mode mode = Mode::Analyze;
  NetworkConfig network;
  std::optional<double> zipf_gamma;    // either this
  std::vector<double> probabilities;   // or an explicit popularity vector

  std::string policy = "algorithm3";   // file|algorithm3|waterfill|gradient|baseline1|baseline2|baseline3
  std::string policy_path;             // for policy == "file"
  std::size_t candidate_budget = 5000;
  double step_scale = 0.5;
  int max_iters = 10000;
  double stop_tol = 1e-7;
  bool trace = false;

  std::string sweep_axis;
  std::vector<double> sweep_values;

  bool simulate = false;               // add Monte Carlo columns where optional
  SimConfig sim;

  std::string target;                  // reproduce: fig2..fig6, table1
  bool paper_fidelity = false;
  std::filesystem::path output_dir = "out";
  unsigned jobs = 1;

  Popularity popularity() const;
};

inline const std::vector<std::string_view> kSweepAxes = {
    "bs_density", "user_density", "path_loss_exponent", "snr_db",
    "cache_size", "num_files",    "zipf_gamma",         "target_rate_bps"};
inline const std::vector<std::string_view> kReproduceTargets = {"fig2", "fig3", "fig4",
                                                                 "fig5", "fig6", "table1"};

/// Parses a JSON experiment document. Throws SpecError listing every violation
/// (parse errors carry line and column).
ExperimentSpec validate_config(std::string_view raw);

/// Resolved configuration as compact JSON, as written into CSV headers.
std::string describe(const ExperimentSpec& spec);

/// Executes the spec, writing CSV artifacts under spec.output_dir and progress
/// to `log`. Returns the process exit status.
int run(const ExperimentSpec& spec, std::ostream& log);

/// Applies the desk or paper-fidelity Monte Carlo profile.
void apply_profile(ExperimentSpec& spec, bool paper_fidelity);

}  // namespace mcache

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcache {

/// Raised when a configuration or input violates a model invariant.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Transmit SNR P/N0. Infinity is an explicit state, not a large number.
class Snr {
 public:
  static Snr linear(double value);
  static Snr from_db(double db);
  static Snr infinite() { return Snr(std::numeric_limits<double>::infinity()); }

  bool is_infinite() const { return std::isinf(value_); }
  double linear_value() const { return value_; }
  /// N0/P; zero when infinite.
  double noise_to_power() const { return is_infinite() ? 0.0 : 1.0 / value_; }
  double db() const { return 10.0 * std::log10(value_); }

 private:
  explicit Snr(double v) : value_(v) {}
  double value_;
};

/// Physical-layer and catalog parameters shared by the analysis, the
/// optimizers and the simulator.
struct NetworkConfig {
  double bs_density = 0.01;    // lambda_b, per unit area
  double user_density = 0.1;   // lambda_u, per unit area
  double path_loss = 4.0;      // alpha > 2
  double bandwidth_hz = 1e7;   // W
  double target_rate = 5e5;    // tau, bit/s
  Snr snr = Snr::infinite();
  int num_files = 1;           // N
  int cache_size = 1;          // K

  /// Every violated invariant, in field order. Empty when valid.
  std::vector<std::string> violations() const;
  /// Throws ConfigError listing every violation.
  void validate() const;

  double rate_ratio() const { return target_rate / bandwidth_hz; }
};

}  // namespace mcache

#include "mcache/network.hpp"

namespace mcache {

Snr Snr::linear(double value) {
  if (!(value > 0.0)) throw ConfigError("snr must be positive");
  return Snr(value);
}

Snr Snr::from_db(double db) {
  if (std::isinf(db) && db > 0) return infinite();
  if (!std::isfinite(db)) throw ConfigError("snr_db must be finite or +inf");
  return Snr(std::pow(10.0, db / 10.0));
}

std::vector<std::string> NetworkConfig::violations() const {
  std::vector<std::string> out;
  if (!(bs_density > 0.0)) out.emplace_back("bs_density must be positive");
  if (!(user_density > 0.0)) out.emplace_back("user_density must be positive");
  if (!(path_loss > 2.0)) out.emplace_back("path loss exponent must exceed 2");
  if (!(bandwidth_hz > 0.0)) out.emplace_back("bandwidth_hz must be positive");
  if (!(target_rate > 0.0)) out.emplace_back("target_rate must be positive");
  if (!(snr.linear_value() > 0.0)) out.emplace_back("snr must be positive");
  if (num_files < 1) out.emplace_back("num_files must be at least 1");
  if (cache_size < 1) out.emplace_back("cache_size must be at least 1");
  if (cache_size > num_files) out.emplace_back("cache_size must not exceed num_files");
  return out;
}

void NetworkConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = v.front();
  for (std::size_t i = 1; i < v.size(); ++i) msg += "; " + v[i];
  throw ConfigError(msg);
}

}  // namespace mcache

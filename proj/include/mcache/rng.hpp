#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace mcache {

/// Philox4x32-10 counter-based generator.
///
/// A stream is identified by (seed, stream id); the generator for stream i
/// can be created directly without advancing any other stream, which makes
/// Monte Carlo results independent of how realizations are split across
/// workers.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// One application of the 10-round bijection.
  static Block bijection(Block counter, Key key);

 private:
  void refill();

  Key key_;
  Block counter_;
  Block buffer_{};
  int next_ = 4;
};

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Philox4x32& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace mcache

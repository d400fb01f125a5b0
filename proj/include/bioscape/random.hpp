#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace bioscape {

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is fully determined by a 64-bit seed and a 64-bit stream id; the
/// n-th draw is a pure function of (seed, stream, n). Engines derive one
/// stream per (step, phase, member) so worker scheduling cannot change the
/// values any member sees.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  /// Stream keyed by an ordered list of tags, e.g. {phase, step, member}.
  static CounterRng keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  /// Number of 64-bit words consumed so far.
  std::uint64_t position() const { return position_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
};

/// splitmix64 finalizer; used to fold stream tags.
std::uint64_t mix64(std::uint64_t x);

}  // namespace bioscape

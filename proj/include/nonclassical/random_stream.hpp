#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace nonclassical {

using PhiloxBlock = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

/// Philox4x64-10 block function (Salmon et al., Random123).
PhiloxBlock philox4x64(PhiloxBlock counter, PhiloxKey key);

/// Counter-based random stream. The (seed, stream_id) pair is the Philox key,
/// so each history owns an independent sequence regardless of which worker
/// runs it or in which order.
///
/// Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return next_u64(); }
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t stream_id() const { return key_[1]; }

  /// Number of 64-bit words drawn so far.
  std::uint64_t position() const { return block_index_ * 4 + lane_ - 4; }

 private:
  PhiloxKey key_;
  std::uint64_t block_index_ = 0;
  PhiloxBlock buffer_{};
  unsigned lane_ = 4;
};

}  // namespace nonclassical

#pragma once

#include <array>
#include <cstdint>

namespace onebit {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A stream is
// fully identified by (key, counter), so any trial can be regenerated
// without touching the others.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter bijection(Counter ctr, Key key);
};

// Sequential view over one Philox stream: key from `seed`, counter words
// (stream_lo, stream_hi, block_lo, block_hi) with the block index advancing.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }
  // Standard normal (Box-Muller; the second variate of each pair is cached).
  double normal();

 private:
  void refill();

  Philox4x32::Key key_{};
  Philox4x32::Counter ctr_{};
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace onebit

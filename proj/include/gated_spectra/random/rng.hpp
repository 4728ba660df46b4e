#pragma once
// Counter-based random streams.
//
// A stream is identified by (master_seed, stream_index) and its draws depend
// on nothing else, so Monte Carlo trial t can run on any thread in any order.
// The generator is Philox4x32-10 keyed by the master seed; the stream index
// occupies the upper half of the counter.

#include <array>
#include <cstdint>

namespace gspec {

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : seed_(master_seed), stream_(stream_index) {}

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream_index() const noexcept { return stream_; }

  /// Independent child stream; children of distinct k (or of distinct
  /// parents) do not overlap.
  RngStream substream(std::uint64_t k) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal (Box-Muller).
  double normal();
  bool bernoulli(double p) { return p >= 1.0 || uniform() < p; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int available_ = 0;  // remaining 64-bit words in buffer_
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// The Philox4x32-10 bijection; exposed for the known-answer test.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

}  // namespace gspec

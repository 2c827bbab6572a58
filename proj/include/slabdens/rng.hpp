#pragma once

#include <cstdint>

namespace slabdens {

/// Counter-based generator: every output is a finalizer hash of
/// (stream key, draw counter).  A stream is fully determined by the
/// pair (seed, stream), so replicate r of an experiment can be drawn
/// in isolation and in any order without sharing state.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  /// Uniform draw in [0, 1) with 53 random bits.
  double next_uniform();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace slabdens

#pragma once

#include <cstdint>

namespace mrx {

// SplitMix64 finalizer. Used to derive independent stream seeds from one
// episode seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// SplitMix64 stream. Eight bytes of state, so per-obstacle and per-robot
// streams are cheap to copy; the distributions are ours and do not depend on
// the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next();

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace mrx

#pragma once

#include <cstdint>
#include <random>

#include "cfad/cgmat.hpp"

namespace cfad {

using Engine = std::mt19937_64;

/// Independent random streams consumed while building one Monte Carlo trial.
/// Keeping them separate lets two architectures share device draws while
/// their AP-side draws differ.
enum class Stream : std::uint64_t {
  kDevicePositions = 1,
  kApPositions = 2,
  kShadowing = 3,
  kSignatures = 4,
  kActivity = 5,
  kChannel = 6,  // keyed additionally by AP index
  kNoise = 7,    // keyed additionally by AP index
  kPermutation = 8,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives a sub-seed from a parent seed and a list of keys.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

/// Seed source for a single trial: (master seed, trial id) -> named streams.
class TrialStreams {
 public:
  TrialStreams(std::uint64_t master_seed, std::uint64_t trial_id)
      : master_(master_seed), trial_(trial_id) {}

  Engine engine(Stream s, std::uint64_t index = 0) const;

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t trial_id() const { return trial_; }

 private:
  std::uint64_t master_;
  std::uint64_t trial_;
};

/// CN(0, variance): real and imaginary parts i.i.d. N(0, variance / 2).
Complex complex_gaussian(Engine& rng, double variance = 1.0);

}  // namespace cfad

#include "cfad/rng.hpp"

#include <cmath>

namespace cfad {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a,
                          std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = mix64(parent);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return h;
}

Engine TrialStreams::engine(Stream s, std::uint64_t index) const {
  return Engine(derive_seed(master_, trial_, static_cast<std::uint64_t>(s),
                            index));
}

Complex complex_gaussian(Engine& rng, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

}  // namespace cfad

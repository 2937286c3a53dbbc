#pragma once

// Uplink signal synthesis: signatures, device activity, small-scale fading
// and the per-AP received blocks Y_m = S D_a D_rho^{1/2} G_m + W_m.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cfad/cgmat.hpp"
#include "cfad/rng.hpp"
#include "cfad/scenario.hpp"

namespace cfad {

struct SignatureBook {
  ComplexMatrix S;  // L x K, column k is the signature of device k

  int length() const { return static_cast<int>(S.rows()); }
  int device_count() const { return static_cast<int>(S.cols()); }
};

struct ActivityPattern {
  std::vector<std::uint8_t> a;  // K flags
  std::vector<int> active_set;  // ascending

  int device_count() const { return static_cast<int>(a.size()); }
  static ActivityPattern from_indices(int K, std::vector<int> active);
};

struct FrameSet {
  std::vector<ComplexMatrix> Y;      // M blocks, L x N
  std::vector<HermitianMatrix> q_y;  // Y_m Y_m^H / N

  int ap_count() const { return static_cast<int>(Y.size()); }
  /// Computes the sample covariances from the blocks.
  static FrameSet from_blocks(std::vector<ComplexMatrix> blocks);
};

/// i.i.d. CN(0, 1) entries, drawn column by column. With `unit_norm` every
/// column is rescaled to unit Euclidean norm afterwards.
SignatureBook draw_signatures(int L, int K, Engine& rng, bool unit_norm = false);

ActivityPattern sample_activity(int K, double epsilon, Engine& rng);

/// Channel and noise for AP m come from the (kChannel, m) and (kNoise, m)
/// streams, so APs can be synthesized in any order. Fading is drawn for all
/// K devices (k fastest, then antenna) whether or not they are active.
FrameSet synthesize_frames(const Scenario& sc, const SignatureBook& book,
                           const ActivityPattern& act, int N,
                           const TrialStreams& rng);

/// FNV-1a digest over the signature entries and activity flags.
std::uint64_t draw_digest(const SignatureBook& book, const ActivityPattern& act);

/// Text dump: "M L N" header, then for each block L rows of N "re im" pairs.
void write_frames(std::ostream& os, const FrameSet& frames);
FrameSet read_frames(std::istream& is);

}  // namespace cfad

#pragma once

// Dominant-AP coordinate descent for the covariance-based maximum-likelihood
// activity estimate, followed by per-device thresholding.
//
// For device k with dominant AP m' = argmax_m beta(m, k) the step is
//
//   d* = (s^H Qi Qy Qi s - s^H Qi s) / (beta(m', k) (s^H Qi s)^2),
//   delta = max(d*, -gamma_k),
//
// with Qi = Q_{m'}^{-1}, Qy = Q_{Y,m'}. Every AP's inverse covariance then
// absorbs the rank-1 change delta * beta(m, k) * s s^H.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cfad/airlink.hpp"
#include "cfad/cgmat.hpp"
#include "cfad/scenario.hpp"

namespace cfad {

struct DetectorConfig {
  int T = 10;
  /// Dense re-inversion period in outer iterations; 0 disables, negative
  /// selects automatically (off for L <= 64, every 5 iterations above).
  int refactor_every = -1;
  std::uint64_t permutation_seed = 0x5eedULL;
  /// Maintain log-determinants so the global cost can be traced.
  bool track_cost = false;

  int resolved_refactor_every(int L) const;
  void validate() const;
};

struct DetectorState {
  std::vector<double> gamma_hat;
  std::vector<HermitianMatrix> q_inv;
  std::vector<double> log_det;  // empty unless cost tracking is enabled
  std::vector<int> dominant_ap;
  std::size_t degenerate_skips = 0;

  int device_count() const { return static_cast<int>(gamma_hat.size()); }
  int ap_count() const { return static_cast<int>(q_inv.size()); }
};

struct DetectionResult {
  std::vector<double> gamma_hat;
  std::vector<std::uint8_t> a_hat;
  std::vector<double> thresholds;

  std::vector<int> detected_set() const;
};

/// Quantities behind a single coordinate update.
struct StepRecord {
  int k = 0;
  int dominant = 0;
  double alpha = 0.0;  // s^H Qi s
  double mu = 0.0;     // s^H Qi Qy Qi s
  double beta = 0.0;   // beta(m', k)
  double d_star = 0.0;
  double delta = 0.0;
  double gamma_before = 0.0;
  bool degenerate = false;
};

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
};

/// Optional diagnostics collected by run_coordinate_descent.
struct DetectorTrace {
  bool record_steps = true;
  std::vector<StepRecord> steps;
  std::vector<IterationRecord> iterations;  // filled when track_cost is set
};

/// argmax_m beta(m, k); ties go to the lowest AP index.
std::vector<int> dominant_aps(const Eigen::MatrixXd& beta);

/// Q^{-1}_m = I / sigma^2, gamma_hat = 0. With `track_cost` the
/// log-determinants start at L log sigma^2.
DetectorState init_state(const Scenario& sc, int L, bool track_cost = false);

/// Evaluates the step for device k without applying it.
StepRecord propose_step(const DetectorState& st, int k, const SignatureBook& book,
                        const FrameSet& frames, const Scenario& sc);

/// Applies one clamped coordinate update and returns what was done. A
/// numerically vanishing s^H Qi s is skipped with delta = 0.
StepRecord coordinate_step(DetectorState& st, int k, const SignatureBook& book,
                           const FrameSet& frames, const Scenario& sc);

/// sigma^2 I + sum_k gamma_k beta(m, k) s_k s_k^H.
HermitianMatrix assemble_covariance(const Scenario& sc, const SignatureBook& book,
                                    const std::vector<double>& gamma, int m);

/// Replaces every inverse (and log-det, when tracked) by a dense recomputation.
void refactor_state(DetectorState& st, const Scenario& sc, const SignatureBook& book);

/// sum_m log|Q_m| + tr(Q_m^{-1} Q_{Y,m}) from the tracked state.
double tracked_cost(const DetectorState& st, const FrameSet& frames);

DetectorState run_coordinate_descent(const FrameSet& frames, const Scenario& sc,
                                     const SignatureBook& book,
                                     const DetectorConfig& cfg,
                                     DetectorTrace* trace = nullptr);

/// a_hat[k] = gamma_hat[k] >= nu sigma^2 / beta(m'(k), k).
DetectionResult threshold_decide(const DetectorState& st, const Scenario& sc,
                                 double nu);

/// Per-coordinate cost against the dominant AP, relative to d = 0:
/// log(1 + d b a) - d b mu / (1 + d b a).
double dominant_block_cost(double d, double alpha, double mu, double beta);

/// Devices failing the fixed-point test: neither |d*| < tol_rel (gamma_k +
/// sigma^2 / beta(m', k)) nor clamped at zero (gamma_k == 0, d* <= 0).
std::vector<int> stationarity_violations(const DetectorState& st,
                                         const SignatureBook& book,
                                         const FrameSet& frames, const Scenario& sc,
                                         double tol_rel);

/// CSV rows "iteration,cost" followed by "step,k,dominant,d_star,delta".
void write_trace(std::ostream& os, const DetectorTrace& trace);

}  // namespace cfad

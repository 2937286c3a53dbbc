#pragma once

// Monte Carlo driver: per-trial synthesis and detection, ROC aggregation,
// received-SNR surveys and co-located vs cell-free comparisons.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfad/airlink.hpp"
#include "cfad/detector.hpp"
#include "cfad/scenario.hpp"

namespace cfad {

class UndefinedMiss : public std::domain_error {
 public:
  UndefinedMiss() : std::domain_error("miss probability undefined: no active device") {}
};

class UndefinedFalseAlarm : public std::domain_error {
 public:
  UndefinedFalseAlarm()
      : std::domain_error("false-alarm probability undefined: every device active") {}
};

struct MetricsPair {
  double p_md = 0.0;
  double p_fa = 0.0;
};

/// p_md = 1 - |A n A^| / |A|, p_fa = |A^ \ A| / (K - |A|). Both sets hold
/// 0-based device indices.
MetricsPair compute_metrics(const std::vector<int>& active,
                            const std::vector<int>& detected, int K);

/// Everything drawn for one trial, in the documented draw order.
struct TrialData {
  Scenario scenario;
  SignatureBook book;
  ActivityPattern activity;
  FrameSet frames;
};

TrialData synthesize_trial(const GeometryConfig& cfg, int trial_id);

/// Permutation seed the harness hands to the detector for a given trial.
std::uint64_t trial_permutation_seed(const DetectorConfig& dcfg, int trial_id);

/// One row per (trial, nu). p_md / p_fa are NaN where undefined.
struct TrialMetrics {
  int trial_id = 0;
  double nu = 0.0;
  double p_md = 0.0;
  double p_fa = 0.0;
  int n_active = 0;
  double elapsed_s = 0.0;
};

struct RocPoint {
  double nu = 0.0;
  double mean_p_fa = 0.0;
  double mean_p_md = 0.0;
  int n_trials_md = 0;  // trials contributing to mean_p_md
  int n_trials_fa = 0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // ascending nu

  bool is_monotone() const;
  /// p_md interpolated linearly at mean p_fa == target; NaN if the curve
  /// never brackets the target.
  double md_at_fa(double target) const;
};

struct TrialSetResult {
  RocCurve curve;
  std::vector<TrialMetrics> rows;  // ordered by (trial_id, nu)
  int n_trials = 0;
  int detector_runs = 0;
  int trials_without_active = 0;  // excluded from the p_md averages
  int trials_all_active = 0;      // excluded from the p_fa averages
  std::vector<std::uint64_t> draw_digests;  // per trial
};

struct RunOptions {
  int workers = 1;  // 0 selects hardware concurrency
  bool record_timing = true;
};

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

/// Geometrically spaced values from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, int count);

/// Averages rows by nu in trial order. `nu_list` must be ascending.
RocCurve aggregate(const std::vector<TrialMetrics>& rows,
                   const std::vector<double>& nu_list);

TrialSetResult run_trials(const GeometryConfig& cfg, const DetectorConfig& dcfg,
                          int n_trials, const std::vector<double>& nu_list,
                          const RunOptions& opts = {});

struct ArchitectureComparison {
  TrialSetResult cell_free;
  TrialSetResult colocated;
};

/// Both arms use the same per-trial streams, so device positions, signatures
/// and activity coincide. The co-located arm is cfg.colocated_twin().
ArchitectureComparison compare_architectures(const GeometryConfig& cfg,
                                             const DetectorConfig& dcfg, int n_trials,
                                             const std::vector<double>& nu_list,
                                             const RunOptions& opts = {});

enum class SnrStatistic {
  kDominantAp,  // best single AP antenna
  kSumOverAps,  // sum of the per-AP single-antenna SNRs
};

SnrStatistic parse_snr_statistic(const std::string& text);
std::string to_string(SnrStatistic s);

struct SnrSurveySide {
  double side_length_m = 0.0;
  std::vector<double> cell_free_db;
  std::vector<double> colocated_db;
  double median_cell_free_db = 0.0;
  double median_colocated_db = 0.0;
  double p5_cell_free_db = 0.0;
  double p5_colocated_db = 0.0;
};

/// Full-power received SNR per device for each cell side. Device positions
/// and shadowing streams are shared between the two architectures.
std::vector<SnrSurveySide> snr_survey(const GeometryConfig& cfg, int n_trials,
                                      const std::vector<double>& cell_sides,
                                      SnrStatistic statistic = SnrStatistic::kDominantAp,
                                      const RunOptions& opts = {});

double median(std::vector<double> v);
/// Nearest-rank percentile, p in (0, 100].
double percentile(std::vector<double> v, double p);

void write_trial_rows(std::ostream& os, const std::vector<TrialMetrics>& rows);
void write_roc_summary(std::ostream& os, const RocCurve& curve);
void write_snr_samples(std::ostream& os, const std::vector<SnrSurveySide>& sides);
void write_snr_summary(std::ostream& os, const std::vector<SnrSurveySide>& sides);

}  // namespace cfad

#pragma once

// Experiment files: YAML document + dotted-path overrides, and the
// dispatcher that turns a resolved spec into result files.
//
// Recognized document (all keys optional, defaults shown):
//
//   mode: roc                # roc | snr-survey | compare | validate
//   n_trials: 100
//   workers: 0               # 0 = hardware concurrency, 1 = serial
//   output_dir: results
//   record_timing: true      # false writes elapsed_s = 0 for reproducible files
//   nu_list: [...]           # ascending threshold multipliers
//   geometry: {side_length_m: 1000, M: 20, N: 2, K: 400, epsilon: 0.1, L: 40,
//              rho_max_mw: 200, sigma2_dbm: -109, shadow_sigma_db: 8,
//              snr_target: auto95, seed: 1, colocated: false,
//              colocated_antennas: 0, unit_norm_signatures: false}
//   detector: {T: 10, refactor_every: -1, permutation_seed: 24301}
//   survey: {cell_sides: [500, 1000, 2000], statistic: dominant}
//   validate: {instances: 20}

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfad/detector.hpp"
#include "cfad/harness.hpp"
#include "cfad/scenario.hpp"

namespace cfad {

enum class Mode { kRoc, kSnrSurvey, kCompare, kValidate };

std::string to_string(Mode m);
Mode parse_mode(const std::string& text);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& field, int line, const std::string& what);
  const std::string& field() const { return field_; }
  int line() const { return line_; }  // 1-based, 0 when unknown

 private:
  std::string field_;
  int line_;
};

class ValidationError : public std::invalid_argument {
 public:
  ValidationError(const std::string& field, const std::string& what);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentSpec {
  GeometryConfig geometry;
  DetectorConfig detector;
  int n_trials = 100;
  std::vector<double> nu_list;
  Mode mode = Mode::kRoc;
  std::string output_dir = "results";
  int workers = 0;
  bool record_timing = true;
  std::vector<double> cell_sides{500.0, 1000.0, 2000.0};
  SnrStatistic snr_statistic = SnrStatistic::kDominantAp;
  int validate_instances = 20;

  void validate() const;
};

/// 97 values, 12 per decade, from 1e-4 to 1e4.
std::vector<double> default_nu_list();

/// Parses `yaml_text` then applies `overrides` ("a.b=value") in order.
ExperimentSpec parse_spec(const std::string& yaml_text,
                          const std::vector<std::string>& overrides = {});

ExperimentSpec parse_spec_file(const std::string& path,
                               const std::vector<std::string>& overrides = {});

/// Fully resolved YAML; parse_spec(emit_spec(s)) reproduces s.
std::string emit_spec(const ExperimentSpec& spec);

/// Executes the experiment, writing results into spec.output_dir.
/// Returns the process exit status.
int run(const ExperimentSpec& spec, std::ostream& log);

}  // namespace cfad

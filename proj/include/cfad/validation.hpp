#pragma once

// Oracle cross-checks of the detector on toy instances, shared by the CLI's
// validate mode.

#include <iosfwd>
#include <string>
#include <vector>

#include "cfad/detector.hpp"
#include "cfad/scenario.hpp"

namespace cfad {

struct ValidationConfig {
  GeometryConfig geometry;  // toy dimensions
  DetectorConfig detector;
  int instances = 20;
  double cost_rel_tol = 1e-2;
  double kkt_tol_rel = 1e-3;
  double inverse_rel_tol = 1e-6;
  double tracked_cost_rel_tol = 1e-6;
  int grid_points = 25;
  int grid_rounds = 3;

  /// M=2, N=4, K=6, L=16, epsilon=0.5, T=50 on top of `base`.
  static ValidationConfig toy(const GeometryConfig& base);
};

struct ValidationCheck {
  std::string name;
  double worst = 0.0;      // worst observed value over all instances
  double tolerance = 0.0;  // pass iff worst <= tolerance
  bool passed = false;
};

std::vector<ValidationCheck> run_validation(const ValidationConfig& cfg);

void print_validation_table(std::ostream& os, const std::vector<ValidationCheck>& checks);

}  // namespace cfad

#pragma once

// Brute-force references for small instances. Nothing here shares code with
// the incremental detector path: covariances are assembled densely and
// factorized from scratch on every evaluation.

#include <vector>

#include "cfad/airlink.hpp"
#include "cfad/scenario.hpp"

namespace cfad::oracle {

struct CostBreakdown {
  double total = 0.0;
  std::vector<double> per_ap;  // log|Q_m| + tr(Q_m^{-1} Q_{Y,m})
};

/// Negative log-likelihood (per antenna, without constants) of gamma.
CostBreakdown ml_cost(const std::vector<double>& gamma, const FrameSet& frames,
                      const Scenario& sc, const SignatureBook& book);

/// 0 followed by `points` log-spaced values on [sigma^2 / 100, 10 rho_max].
std::vector<double> default_grid(double sigma2_mw, double rho_max_mw,
                                 int points = 25);

struct GridResult {
  std::vector<double> gamma;
  double cost = 0.0;
  int rounds = 0;
};

/// Cyclic coordinate-wise exhaustive search over `grid`, starting from
/// gamma = 0, until a full sweep changes nothing or `max_rounds` is reached.
GridResult grid_search_min(const FrameSet& frames, const Scenario& sc,
                           const SignatureBook& book, const std::vector<double>& grid,
                           int max_rounds = 3);

}  // namespace cfad::oracle

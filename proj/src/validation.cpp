#include "cfad/validation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "cfad/harness.hpp"
#include "cfad/oracle.hpp"

namespace cfad {

ValidationConfig ValidationConfig::toy(const GeometryConfig& base) {
  ValidationConfig v;
  v.geometry = base;
  v.geometry.M = 2;
  v.geometry.N = 4;
  v.geometry.K = 6;
  v.geometry.L = 16;
  v.geometry.epsilon = 0.5;
  v.geometry.colocated = false;
  v.detector.T = 50;
  return v;
}

std::vector<ValidationCheck> run_validation(const ValidationConfig& cfg) {
  cfg.geometry.validate();
  ValidationCheck cost{"oracle_cost_gap_rel", 0.0, cfg.cost_rel_tol};
  ValidationCheck kkt{"kkt_violations", 0.0, 0.0};
  ValidationCheck inverse{"incremental_inverse_rel", 0.0, cfg.inverse_rel_tol};
  ValidationCheck tracked{"tracked_cost_rel", 0.0, cfg.tracked_cost_rel_tol};
  ValidationCheck descent{"dominant_block_ascent", 0.0, 1e-10};
  ValidationCheck negative{"negative_gamma_entries", 0.0, 0.0};

  for (int i = 0; i < cfg.instances; ++i) {
    const TrialData d = synthesize_trial(cfg.geometry, i);
    DetectorConfig dcfg = cfg.detector;
    dcfg.track_cost = true;
    dcfg.permutation_seed = trial_permutation_seed(cfg.detector, i);
    DetectorTrace trace;
    const DetectorState st =
        run_coordinate_descent(d.frames, d.scenario, d.book, dcfg, &trace);

    const double det_cost = oracle::ml_cost(st.gamma_hat, d.frames, d.scenario, d.book).total;
    const auto grid = oracle::default_grid(d.scenario.sigma2_mw, d.scenario.rho_max_mw,
                                           cfg.grid_points);
    const auto best =
        oracle::grid_search_min(d.frames, d.scenario, d.book, grid, cfg.grid_rounds);
    cost.worst = std::max(cost.worst, std::abs(det_cost - best.cost) / std::abs(best.cost));

    kkt.worst += static_cast<double>(
        stationarity_violations(st, d.book, d.frames, d.scenario, cfg.kkt_tol_rel).size());

    for (int m = 0; m < st.ap_count(); ++m) {
      const HermitianMatrix dense =
          dense_inverse(assemble_covariance(d.scenario, d.book, st.gamma_hat, m));
      inverse.worst =
          std::max(inverse.worst, relative_frobenius(st.q_inv[m].matrix(), dense.matrix()));
    }

    tracked.worst = std::max(
        tracked.worst, std::abs(tracked_cost(st, d.frames) - det_cost) / std::abs(det_cost));

    for (const auto& r : trace.steps) {
      if (r.degenerate) continue;
      const double rise = dominant_block_cost(r.delta, r.alpha, r.mu, r.beta);
      descent.worst = std::max(descent.worst, rise);
    }
    negative.worst += static_cast<double>(std::count_if(
        st.gamma_hat.begin(), st.gamma_hat.end(), [](double g) { return g < 0.0; }));
  }

  std::vector<ValidationCheck> out{cost, kkt, inverse, tracked, descent, negative};
  for (auto& c : out) c.passed = c.worst <= c.tolerance;
  return out;
}

void print_validation_table(std::ostream& os, const std::vector<ValidationCheck>& checks) {
  os << std::left << std::setw(28) << "check" << std::setw(16) << "worst"
     << std::setw(16) << "tolerance" << "result\n";
  for (const auto& c : checks) {
    os << std::left << std::setw(28) << c.name << std::setw(16) << c.worst << std::setw(16)
       << c.tolerance << (c.passed ? "PASS" : "FAIL") << '\n';
  }
}

}  // namespace cfad

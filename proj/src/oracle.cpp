#include "cfad/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace cfad::oracle {

namespace {

// Q_m built column by column from the outer products, independent of the
// detector's assemble_covariance.
ComplexMatrix covariance(const std::vector<double>& gamma, const Scenario& sc,
                         const SignatureBook& book, int m) {
  const Eigen::Index L = book.S.rows();
  ComplexMatrix q = ComplexMatrix::Identity(L, L) * sc.sigma2_mw;
  for (Eigen::Index k = 0; k < book.S.cols(); ++k) {
    const double w = gamma[k] * sc.beta(m, k);
    if (w != 0.0) q += w * book.S.col(k) * book.S.col(k).adjoint();
  }
  return q;
}

}  // namespace

CostBreakdown ml_cost(const std::vector<double>& gamma, const FrameSet& frames,
                      const Scenario& sc, const SignatureBook& book) {
  if (static_cast<int>(gamma.size()) != sc.device_count()) {
    throw std::invalid_argument("ml_cost: gamma length mismatch");
  }
  for (double g : gamma) {
    if (!(g >= 0.0)) throw std::invalid_argument("ml_cost: gamma must be non-negative");
  }
  CostBreakdown out;
  out.per_ap.reserve(sc.ap_count());
  for (int m = 0; m < sc.ap_count(); ++m) {
    const ComplexMatrix q = covariance(gamma, sc, book, m);
    Eigen::LLT<ComplexMatrix> llt(q);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefinite("ml_cost: covariance not positive definite");
    }
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      log_det += 2.0 * std::log(llt.matrixLLT()(i, i).real());
    }
    const double tr = llt.solve(frames.q_y[m].matrix()).trace().real();
    out.per_ap.push_back(log_det + tr);
    out.total += out.per_ap.back();
  }
  return out;
}

std::vector<double> default_grid(double sigma2_mw, double rho_max_mw, int points) {
  std::vector<double> grid{0.0};
  const double lo = std::log10(sigma2_mw * 1e-2);
  const double hi = std::log10(rho_max_mw * 10.0);
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    grid.push_back(std::pow(10.0, lo + t * (hi - lo)));
  }
  return grid;
}

GridResult grid_search_min(const FrameSet& frames, const Scenario& sc,
                           const SignatureBook& book, const std::vector<double>& grid,
                           int max_rounds) {
  GridResult res;
  res.gamma.assign(sc.device_count(), 0.0);
  res.cost = ml_cost(res.gamma, frames, sc, book).total;
  for (int round = 0; round < max_rounds; ++round) {
    bool changed = false;
    for (int k = 0; k < sc.device_count(); ++k) {
      const double keep = res.gamma[k];
      double best_value = keep;
      double best_cost = res.cost;
      for (double g : grid) {
        if (g == keep) continue;
        res.gamma[k] = g;
        const double c = ml_cost(res.gamma, frames, sc, book).total;
        if (c < best_cost) {
          best_cost = c;
          best_value = g;
        }
      }
      res.gamma[k] = best_value;
      if (best_value != keep) {
        res.cost = best_cost;
        changed = true;
      }
    }
    res.rounds = round + 1;
    if (!changed) break;
  }
  return res;
}

}  // namespace cfad::oracle

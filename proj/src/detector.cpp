#include "cfad/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "cfad/rng.hpp"

namespace cfad {

int DetectorConfig::resolved_refactor_every(int L) const {
  if (refactor_every >= 0) return refactor_every;
  return L <= 64 ? 0 : 5;
}

void DetectorConfig::validate() const {
  if (T < 1) throw std::invalid_argument("T: must be >= 1");
}

std::vector<int> DetectionResult::detected_set() const {
  std::vector<int> out;
  for (std::size_t k = 0; k < a_hat.size(); ++k) {
    if (a_hat[k]) out.push_back(static_cast<int>(k));
  }
  return out;
}

std::vector<int> dominant_aps(const Eigen::MatrixXd& beta) {
  std::vector<int> out(beta.cols(), 0);
  for (Eigen::Index k = 0; k < beta.cols(); ++k) {
    int best = 0;
    for (Eigen::Index m = 1; m < beta.rows(); ++m) {
      if (beta(m, k) > beta(best, k)) best = static_cast<int>(m);
    }
    out[k] = best;
  }
  return out;
}

DetectorState init_state(const Scenario& sc, int L, bool track_cost) {
  if (!(sc.sigma2_mw > 0.0)) {
    throw std::invalid_argument("init_state: sigma2 must be positive");
  }
  DetectorState st;
  st.gamma_hat.assign(sc.device_count(), 0.0);
  st.q_inv.assign(sc.ap_count(), HermitianMatrix::identity(L, 1.0 / sc.sigma2_mw));
  if (track_cost) st.log_det.assign(sc.ap_count(), L * std::log(sc.sigma2_mw));
  st.dominant_ap = dominant_aps(sc.beta);
  return st;
}

StepRecord propose_step(const DetectorState& st, int k, const SignatureBook& book,
                        const FrameSet& frames, const Scenario& sc) {
  StepRecord r;
  r.k = k;
  r.dominant = st.dominant_ap[k];
  r.beta = sc.beta(r.dominant, k);
  r.gamma_before = st.gamma_hat[k];

  const auto s = book.S.col(k);
  const ComplexVector v = st.q_inv[r.dominant].matrix() * s;
  r.alpha = s.dot(v).real();
  if (!(r.alpha > kDenominatorFloor)) {
    r.degenerate = true;
    return r;
  }
  r.mu = v.dot(frames.q_y[r.dominant].matrix() * v).real();
  r.d_star = (r.mu - r.alpha) / (r.beta * r.alpha * r.alpha);
  r.delta = std::max(r.d_star, -r.gamma_before);
  return r;
}

StepRecord coordinate_step(DetectorState& st, int k, const SignatureBook& book,
                           const FrameSet& frames, const Scenario& sc) {
  StepRecord r = propose_step(st, k, book, frames, sc);
  if (r.degenerate) {
    ++st.degenerate_skips;
    return r;
  }
  if (r.delta == 0.0) return r;

  const ComplexVector s = book.S.col(k);
  const bool track = !st.log_det.empty();
  // A DenominatorNonPositive from any block propagates and leaves the state
  // partially updated; callers abandon the run.
  for (int m = 0; m < st.ap_count(); ++m) {
    const double inc = rank_one_inverse_update_in_place(st.q_inv[m], s,
                                                        r.delta * sc.beta(m, k));
    if (track) st.log_det[m] += inc;
  }
  // gamma + delta with delta >= -gamma cannot round below zero.
  st.gamma_hat[k] = r.delta == -r.gamma_before ? 0.0 : r.gamma_before + r.delta;
  return r;
}

HermitianMatrix assemble_covariance(const Scenario& sc, const SignatureBook& book,
                                    const std::vector<double>& gamma, int m) {
  Eigen::VectorXd w(book.S.cols());
  for (Eigen::Index k = 0; k < w.size(); ++k) w(k) = gamma[k] * sc.beta(m, k);
  ComplexMatrix q = book.S * w.asDiagonal() * book.S.adjoint();
  q.diagonal().array() += sc.sigma2_mw;
  return HermitianMatrix(std::move(q));
}

void refactor_state(DetectorState& st, const Scenario& sc, const SignatureBook& book) {
  for (int m = 0; m < st.ap_count(); ++m) {
    const HermitianMatrix q = assemble_covariance(sc, book, st.gamma_hat, m);
    st.q_inv[m] = dense_inverse(q);
    if (!st.log_det.empty()) st.log_det[m] = dense_log_det(q);
  }
}

double tracked_cost(const DetectorState& st, const FrameSet& frames) {
  if (st.log_det.empty()) {
    throw std::logic_error("tracked_cost: cost tracking is disabled");
  }
  double total = 0.0;
  for (int m = 0; m < st.ap_count(); ++m) {
    const ComplexMatrix& a = st.q_inv[m].matrix();
    const ComplexMatrix& b = frames.q_y[m].matrix();
    // tr(A B) = sum_ij A_ij B_ji
    const double tr = a.cwiseProduct(b.transpose()).sum().real();
    total += st.log_det[m] + tr;
  }
  return total;
}

DetectorState run_coordinate_descent(const FrameSet& frames, const Scenario& sc,
                                     const SignatureBook& book,
                                     const DetectorConfig& cfg,
                                     DetectorTrace* trace) {
  cfg.validate();
  const int K = sc.device_count();
  const int L = book.length();
  if (book.device_count() != K || frames.ap_count() != sc.ap_count()) {
    throw std::invalid_argument("run_coordinate_descent: dimension mismatch");
  }
  const bool track = cfg.track_cost;
  DetectorState st = init_state(sc, L, track);
  const int refactor = cfg.resolved_refactor_every(L);

  Engine perm_rng(mix64(cfg.permutation_seed));
  std::vector<int> order(K);
  for (int it = 0; it < cfg.T; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), perm_rng);
    for (int k : order) {
      StepRecord r = coordinate_step(st, k, book, frames, sc);
      if (trace != nullptr && trace->record_steps) trace->steps.push_back(r);
    }
    if (refactor > 0 && (it + 1) % refactor == 0 && it + 1 < cfg.T) {
      refactor_state(st, sc, book);
    }
    if (trace != nullptr && track) {
      trace->iterations.push_back({it + 1, tracked_cost(st, frames)});
    }
  }
  return st;
}

DetectionResult threshold_decide(const DetectorState& st, const Scenario& sc,
                                 double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("nu: must be positive");
  const int K = st.device_count();
  DetectionResult res;
  res.gamma_hat = st.gamma_hat;
  res.a_hat.resize(K);
  res.thresholds.resize(K);
  for (int k = 0; k < K; ++k) {
    res.thresholds[k] = nu * sc.sigma2_mw / sc.beta(st.dominant_ap[k], k);
    res.a_hat[k] = st.gamma_hat[k] >= res.thresholds[k] ? 1 : 0;
  }
  return res;
}

double dominant_block_cost(double d, double alpha, double mu, double beta) {
  const double den = 1.0 + d * beta * alpha;
  return std::log(den) - d * beta * mu / den;
}

std::vector<int> stationarity_violations(const DetectorState& st,
                                         const SignatureBook& book,
                                         const FrameSet& frames, const Scenario& sc,
                                         double tol_rel) {
  std::vector<int> bad;
  for (int k = 0; k < st.device_count(); ++k) {
    const StepRecord r = propose_step(st, k, book, frames, sc);
    if (r.degenerate) continue;
    const double g = st.gamma_hat[k];
    const double scale = g + sc.sigma2_mw / r.beta;
    const bool interior = std::abs(r.d_star) < tol_rel * scale;
    const bool clamped = g == 0.0 && r.d_star <= 0.0;
    if (!interior && !clamped) bad.push_back(k);
  }
  return bad;
}

void write_trace(std::ostream& os, const DetectorTrace& trace) {
  os << "iteration,cost\n";
  os.precision(17);
  for (const auto& it : trace.iterations) os << it.iteration << ',' << it.cost << '\n';
  os << "step,k,dominant,d_star,delta\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    os << i << ',' << s.k << ',' << s.dominant << ',' << s.d_star << ',' << s.delta
       << '\n';
  }
}

}  // namespace cfad

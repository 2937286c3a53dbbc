#include "cfad/cgmat.hpp"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

namespace cfad {

DenominatorNonPositive::DenominatorNonPositive(double denominator)
    : std::runtime_error("rank-1 update denominator not positive: " +
                         std::to_string(denominator)),
      denominator_(denominator) {}

HermitianMatrix::HermitianMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw std::invalid_argument("HermitianMatrix requires a square matrix");
  }
  symmetrize();
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index order, double scale) {
  HermitianMatrix h;
  h.m_ = ComplexMatrix::Identity(order, order) * Complex(scale, 0.0);
  return h;
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index order) {
  HermitianMatrix h;
  h.m_ = ComplexMatrix::Zero(order, order);
  return h;
}

double HermitianMatrix::hermitian_defect() const {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < m_.cols(); ++j) {
    for (Eigen::Index i = j; i < m_.rows(); ++i) {
      worst = std::max(worst, std::abs(m_(i, j) - std::conj(m_(j, i))));
    }
  }
  return worst;
}

double HermitianMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void HermitianMatrix::subtract_outer(const ComplexVector& w, double scale) {
  // Plain real arithmetic: std::complex products carry NaN recovery branches
  // that block vectorization of this hot loop.
  const Eigen::Index n = m_.rows();
  const double* wp = reinterpret_cast<const double*>(w.data());
  double* mp = reinterpret_cast<double*>(m_.data());
  for (Eigen::Index j = 0; j < n; ++j) {
    const double cr = wp[2 * j] * scale;
    const double ci = -wp[2 * j + 1] * scale;
    double* col = mp + 2 * j * n;
    for (Eigen::Index i = j; i < n; ++i) {
      const double ar = wp[2 * i];
      const double ai = wp[2 * i + 1];
      col[2 * i] -= ar * cr - ai * ci;
      col[2 * i + 1] -= ar * ci + ai * cr;
    }
  }
  mirror_lower();
}

void HermitianMatrix::symmetrize() {
  const Eigen::Index n = m_.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    m_(j, j) = Complex(m_(j, j).real(), 0.0);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const Complex avg = 0.5 * (m_(i, j) + std::conj(m_(j, i)));
      m_(i, j) = avg;
      m_(j, i) = std::conj(avg);
    }
  }
}

void HermitianMatrix::mirror_lower() {
  const Eigen::Index n = m_.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    m_(j, j) = Complex(m_(j, j).real(), 0.0);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      m_(j, i) = std::conj(m_(i, j));
    }
  }
}

double rank_one_inverse_update_in_place(HermitianMatrix& q_inv,
                                        const ComplexVector& s, double c) {
  if (c == 0.0) {
    return 0.0;
  }
  const ComplexVector v = q_inv.matrix() * s;
  const double alpha = s.dot(v).real();
  const double denominator = 1.0 + c * alpha;
  if (!(denominator > kDenominatorFloor)) {
    throw DenominatorNonPositive(denominator);
  }
  q_inv.subtract_outer(v, c / denominator);
  return std::log(denominator);
}

HermitianMatrix rank_one_inverse_update(const HermitianMatrix& q_inv,
                                        const ComplexVector& s, double c) {
  HermitianMatrix out = q_inv;
  rank_one_inverse_update_in_place(out, s, c);
  return out;
}

double log_det_rank_one_update(double log_det_q, const HermitianMatrix& q_inv,
                               const ComplexVector& s, double c) {
  if (c == 0.0) {
    return log_det_q;
  }
  const double denominator = 1.0 + c * quad_form(q_inv, s);
  if (!(denominator > kDenominatorFloor)) {
    throw DenominatorNonPositive(denominator);
  }
  return log_det_q + std::log(denominator);
}

double quad_form(const HermitianMatrix& q_inv, const ComplexVector& s) {
  return s.dot(q_inv.matrix() * s).real();
}

double sandwich_form(const HermitianMatrix& q_inv, const HermitianMatrix& q_y,
                     const ComplexVector& s) {
  const ComplexVector v = q_inv.matrix() * s;
  return v.dot(q_y.matrix() * v).real();
}

HermitianMatrix dense_inverse(const HermitianMatrix& q) {
  Eigen::LLT<ComplexMatrix> llt(q.matrix());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("Cholesky factorization failed");
  }
  const Eigen::Index n = q.order();
  return HermitianMatrix(llt.solve(ComplexMatrix::Identity(n, n)));
}

double dense_log_det(const HermitianMatrix& q) {
  Eigen::LLT<ComplexMatrix> llt(q.matrix());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("Cholesky factorization failed");
  }
  double acc = 0.0;
  const ComplexMatrix& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    acc += std::log(l(i, i).real());
  }
  return 2.0 * acc;
}

double relative_frobenius(const ComplexMatrix& a, const ComplexMatrix& b) {
  const double denom = b.norm();
  const double diff = (a - b).norm();
  return denom > 0.0 ? diff / denom : diff;
}

}  // namespace cfad

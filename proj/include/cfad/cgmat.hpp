#pragma once

// Complex dense kernels for Hermitian positive-definite matrices that evolve
// by rank-1 updates. The detector keeps one inverse covariance per access
// point and mutates it through these routines only.

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace cfad {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Floor on the Sherman-Morrison denominator 1 + c s^H Q^{-1} s.
inline constexpr double kDenominatorFloor = 1e-12;

class DenominatorNonPositive : public std::runtime_error {
 public:
  explicit DenominatorNonPositive(double denominator);
  double denominator() const { return denominator_; }

 private:
  double denominator_;
};

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense Hermitian matrix. Full storage is kept; every mutation leaves
/// A(i,j) == conj(A(j,i)) and a real diagonal.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  /// Takes ownership of `m` and replaces it by (m + m^H) / 2.
  explicit HermitianMatrix(ComplexMatrix m);

  static HermitianMatrix identity(Eigen::Index order, double scale = 1.0);
  static HermitianMatrix zero(Eigen::Index order);

  Eigen::Index order() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  /// Largest |A(i,j) - conj(A(j,i))| over all entries.
  double hermitian_defect() const;

  /// Smallest eigenvalue; intended for test and debug paths.
  double min_eigenvalue() const;

  /// In-place A <- A - w w^H * scale, touching the lower triangle and then
  /// mirroring it so symmetry is exact.
  void subtract_outer(const ComplexVector& w, double scale);

 private:
  void symmetrize();
  void mirror_lower();

  ComplexMatrix m_;
};

/// Returns (Q + c s s^H)^{-1} given q_inv = Q^{-1}.
/// Throws DenominatorNonPositive when 1 + c s^H q_inv s <= kDenominatorFloor.
HermitianMatrix rank_one_inverse_update(const HermitianMatrix& q_inv,
                                        const ComplexVector& s, double c);

/// In-place form used on the hot path. Returns log(1 + c s^H q_inv s), the
/// matching log-determinant increment. Leaves q_inv untouched on error.
double rank_one_inverse_update_in_place(HermitianMatrix& q_inv,
                                        const ComplexVector& s, double c);

/// log|Q + c s s^H| from log|Q| and Q^{-1}.
double log_det_rank_one_update(double log_det_q, const HermitianMatrix& q_inv,
                               const ComplexVector& s, double c);

/// s^H A s (real part; A is Hermitian so the imaginary part is rounding).
double quad_form(const HermitianMatrix& q_inv, const ComplexVector& s);

/// s^H A B A s evaluated as v^H B v with v = A s.
double sandwich_form(const HermitianMatrix& q_inv, const HermitianMatrix& q_y,
                     const ComplexVector& s);

/// Inverse through a Cholesky factorization.
HermitianMatrix dense_inverse(const HermitianMatrix& q);

/// log|Q| through a Cholesky factorization.
double dense_log_det(const HermitianMatrix& q);

/// ||a - b||_F / ||b||_F (or the plain norm when b is zero).
double relative_frobenius(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace cfad

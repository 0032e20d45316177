#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace risnoma {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Raised when an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by extract_rank_one when sigma_2/sigma_1 exceeds the tolerance.
class RankToleranceExceeded : public std::runtime_error {
 public:
  RankToleranceExceeded(double ratio, double tolerance);
  double ratio() const noexcept { return ratio_; }

 private:
  double ratio_;
};

/// Dense complex Hermitian matrix. Construction checks the Hermitian
/// invariant ||A - A^H||_F <= 1e-10 * max(1, ||A||_F) and stores the exactly
/// symmetrized value.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const ComplexMatrix& m);

  static HermitianMatrix zero(Eigen::Index dim);
  static HermitianMatrix identity(Eigen::Index dim);
  static HermitianMatrix outer(const ComplexVector& w);
  /// Symmetrizes without validation. For iterates that are Hermitian up to
  /// round-off by construction.
  static HermitianMatrix from_symmetrized(const ComplexMatrix& m);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double trace() const { return m_.trace().real(); }
  double frobenius_norm() const { return m_.norm(); }

 private:
  ComplexMatrix m_;
};

/// Real inner product Re Tr(A^H B).
double inner(const ComplexMatrix& a, const ComplexMatrix& b);

struct EigenDecomposition {
  RealVector eigenvalues;     // descending
  ComplexMatrix eigenvectors; // column i pairs with eigenvalues(i)
};

EigenDecomposition hermitian_eig(const HermitianMatrix& a);

/// [[Re A, -Im A], [Im A, Re A]]. Each eigenvalue of A appears twice.
RealMatrix real_embed(const HermitianMatrix& a);

/// ||A||_* - ||A||_2 = sum_{i>=2} sigma_i(A) for (numerically) PSD A.
double nuclear_minus_spectral(const HermitianMatrix& a);

/// Leading eigenvector of A.
ComplexVector leading_eigenvector(const HermitianMatrix& a);

/// Returns w = sqrt(sigma_1) u_1 with its global phase fixed so that the
/// largest-magnitude entry is real and nonnegative (first such entry on ties).
ComplexVector extract_rank_one(const HermitianMatrix& a, double rel_tol);

/// Rotates w so its largest-magnitude entry is real nonnegative.
ComplexVector fix_global_phase(const ComplexVector& w);

void require_finite(const ComplexVector& v, const std::string& what);
void require_finite(const ComplexMatrix& m, const std::string& what);

inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace risnoma

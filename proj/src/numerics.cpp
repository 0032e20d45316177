#include "risnoma/numerics.hpp"

#include <algorithm>
#include <sstream>

namespace risnoma {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kPsdTol = 1e-8;

// Singular values of a Hermitian matrix, descending.
RealVector singular_values(const RealVector& eigenvalues) {
  RealVector s = eigenvalues.cwiseAbs();
  std::sort(s.data(), s.data() + s.size(), std::greater<>());
  return s;
}

}  // namespace

RankToleranceExceeded::RankToleranceExceeded(double ratio, double tolerance)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "rank-one tolerance exceeded: sigma2/sigma1 = " << ratio
           << " > " << tolerance;
        return os.str();
      }()),
      ratio_(ratio) {}

HermitianMatrix::HermitianMatrix(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw ValidationError("HermitianMatrix: matrix is not square");
  require_finite(m, "HermitianMatrix");
  const double asym = (m - m.adjoint()).norm();
  if (asym > kHermitianTol * std::max(1.0, m.norm())) {
    std::ostringstream os;
    os << "HermitianMatrix: ||A - A^H||_F = " << asym << " exceeds tolerance";
    throw ValidationError(os.str());
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index dim) {
  return from_symmetrized(ComplexMatrix::Zero(dim, dim));
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
  return from_symmetrized(ComplexMatrix::Identity(dim, dim));
}

HermitianMatrix HermitianMatrix::outer(const ComplexVector& w) {
  return from_symmetrized(w * w.adjoint());
}

HermitianMatrix HermitianMatrix::from_symmetrized(const ComplexMatrix& m) {
  HermitianMatrix h;
  h.m_ = 0.5 * (m + m.adjoint());
  return h;
}

double inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

EigenDecomposition hermitian_eig(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.matrix());
  if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: eigensolver failed");
  EigenDecomposition out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.eigenvectors = es.eigenvectors().rowwise().reverse();
  return out;
}

RealMatrix real_embed(const HermitianMatrix& a) {
  const Eigen::Index n = a.dim();
  RealMatrix out(2 * n, 2 * n);
  const RealMatrix re = a.matrix().real();
  const RealMatrix im = a.matrix().imag();
  out.topLeftCorner(n, n) = re;
  out.topRightCorner(n, n) = -im;
  out.bottomLeftCorner(n, n) = im;
  out.bottomRightCorner(n, n) = re;
  return out;
}

double nuclear_minus_spectral(const HermitianMatrix& a) {
  const EigenDecomposition ed = hermitian_eig(a);
  const RealVector& ev = ed.eigenvalues;
  if (ev.size() == 0) return 0.0;
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev(ev.size() - 1) < -kPsdTol * scale) {
    std::ostringstream os;
    os << "nuclear_minus_spectral: matrix is indefinite (min eigenvalue "
       << ev(ev.size() - 1) << ")";
    throw ValidationError(os.str());
  }
  const RealVector s = singular_values(ev);
  return s.sum() - s(0);
}

ComplexVector leading_eigenvector(const HermitianMatrix& a) {
  return hermitian_eig(a).eigenvectors.col(0);
}

ComplexVector fix_global_phase(const ComplexVector& w) {
  if (w.size() == 0) return w;
  const double peak = w.cwiseAbs().maxCoeff();
  if (peak == 0.0) return w;
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (std::abs(w(i)) >= peak * (1.0 - 1e-12)) {
      idx = i;
      break;
    }
  }
  const Complex rot = std::conj(w(idx)) / std::abs(w(idx));
  return w * rot;
}

ComplexVector extract_rank_one(const HermitianMatrix& a, double rel_tol) {
  const EigenDecomposition ed = hermitian_eig(a);
  const Eigen::Index n = a.dim();
  if (n == 0) return ComplexVector(0);
  const RealVector s = singular_values(ed.eigenvalues);
  if (s(0) == 0.0) return ComplexVector::Zero(n);
  const double ratio = n > 1 ? s(1) / s(0) : 0.0;
  if (ratio > rel_tol) throw RankToleranceExceeded(ratio, rel_tol);
  const double lead = std::max(ed.eigenvalues(0), 0.0);
  return fix_global_phase(std::sqrt(lead) * ed.eigenvectors.col(0));
}

void require_finite(const ComplexVector& v, const std::string& what) {
  if (!v.allFinite()) throw ValidationError(what + ": non-finite entry");
}

void require_finite(const ComplexMatrix& m, const std::string& what) {
  if (!m.allFinite()) throw ValidationError(what + ": non-finite entry");
}

}  // namespace risnoma

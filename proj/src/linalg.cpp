#include "onebit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "onebit/errors.hpp"

namespace onebit {

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double max_abs(const CMat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_symmetric(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, max_abs(m));
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_hermitian(const CMat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, max_abs(m));
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CVec vec(const CMat& m) {
  CVec out(m.size());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.segment(j * m.rows(), m.rows()) = m.col(j);
  return out;
}

HermitianInverse hermitian_pd_inverse(const CMat& m, double ratio_floor) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionError("hermitian_pd_inverse: matrix must be square and non-empty");
  const CMat sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> eig(sym);
  if (eig.info() != Eigen::Success) throw SingularityError("eigen decomposition failed");
  const Vec& lambda = eig.eigenvalues();
  const double lo = lambda.minCoeff();
  const double hi = lambda.maxCoeff();
  if (!(hi > 0.0) || lo < ratio_floor * hi) {
    std::ostringstream os;
    os << "matrix is singular or not positive definite (eigenvalue range [" << lo << ", " << hi
       << "], ratio floor " << ratio_floor << ")";
    throw SingularityError(os.str());
  }
  const CMat& u = eig.eigenvectors();
  CMat inv = u * lambda.cwiseInverse().asDiagonal() * u.adjoint();
  inv = 0.5 * (inv + inv.adjoint());
  return {inv, lo, hi};
}

Mat spd_inverse(const Mat& m) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) throw DomainError("matrix is not positive definite");
  Mat inv = llt.solve(Mat::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

CMat hermitian_psd_factor(const CMat& m) {
  const CMat sym = 0.5 * (m + m.adjoint());
  Eigen::LLT<CMat> llt(sym);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<CMat> eig(sym);
  const double hi = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(hi, 1.0))
    throw DomainError("covariance matrix is not positive semidefinite");
  const Vec root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace onebit

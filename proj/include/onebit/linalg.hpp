#pragma once

#include <complex>

#include <Eigen/Dense>

namespace onebit {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Largest absolute entry; 0 for an empty matrix.
double max_abs(const Mat& m);
double max_abs(const CMat& m);

bool is_symmetric(const Mat& m, double tol);
bool is_hermitian(const CMat& m, double tol);

// Kronecker product a ⊗ b.
CMat kron(const CMat& a, const CMat& b);

// Column-stacking vectorisation, vec(M) = [m_1; m_2; ...].
CVec vec(const CMat& m);

struct HermitianInverse {
  CMat inverse;
  double min_eigenvalue;
  double max_eigenvalue;
};

// Inverse of a Hermitian positive definite matrix through its eigen
// decomposition. Throws SingularityError when min/max eigenvalue < ratio_floor.
HermitianInverse hermitian_pd_inverse(const CMat& m, double ratio_floor = 1e-12);

// Inverse of a real symmetric positive definite matrix (Cholesky).
// Throws DomainError when the matrix is not positive definite.
Mat spd_inverse(const Mat& m);

// Factor F with F F^H = m for a Hermitian positive semidefinite m. Uses
// Cholesky when possible and a clamped eigen square root otherwise.
CMat hermitian_psd_factor(const CMat& m);

}  // namespace onebit

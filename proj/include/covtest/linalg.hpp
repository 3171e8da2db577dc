#pragma once

#include <complex>

#include <Eigen/Dense>

namespace covtest {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Eigenvalues of a Hermitian matrix in descending order. Negative values
/// produced by rounding are clamped to zero; a warning is emitted on stderr
/// when one falls below -1e-8 times the largest eigenvalue.
RVector hermitian_eigenvalues_desc(const CMatrix& a);

/// Eigenvalues of a^{-1} b for Hermitian positive definite a and Hermitian b,
/// in descending order. Computed by whitening with the Cholesky factor of a
/// (a = L L^*) and solving the Hermitian problem L^{-1} b L^{-*}.
/// Throws SingularCovariance when a is not numerically positive definite.
RVector generalized_eigenvalues_desc(const CMatrix& a, const CMatrix& b);

/// Eigenvalues of a real symmetric matrix in descending order (no clamping).
RVector symmetric_eigenvalues_desc(const RMatrix& a);

/// Ratio of largest to smallest eigenvalue of a symmetric matrix; +inf when
/// the smallest eigenvalue is not positive.
double condition_number(const RMatrix& a);

}  // namespace covtest

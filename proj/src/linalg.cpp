#include "covtest/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "covtest/errors.hpp"

namespace covtest {

RVector hermitian_eigenvalues_desc(const CMatrix& a) {
    if (a.rows() != a.cols()) {
        throw ShapeError("eigenvalues requested for a non-square matrix");
    }
    const Eigen::SelfAdjointEigenSolver<CMatrix> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericError("Hermitian eigensolver did not converge");
    }
    RVector values = solver.eigenvalues().reverse();
    const double top = values.size() > 0 ? std::max(values(0), 0.0) : 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values(i) < 0.0) {
            if (values(i) < -1e-8 * top) {
                std::cerr << "covtest: warning: clamping negative eigenvalue " << values(i)
                          << " of a sample covariance to zero\n";
            }
            values(i) = 0.0;
        }
    }
    return values;
}

RVector generalized_eigenvalues_desc(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        throw ShapeError("generalized eigenproblem needs two square matrices of equal size");
    }
    const Eigen::LLT<CMatrix> llt(a);
    if (llt.info() != Eigen::Success) {
        throw SingularCovariance("covariance matrix is not positive definite");
    }
    const auto& factor = llt.matrixL();
    // Reject pivots that are tiny relative to the largest one: the matrix is
    // numerically singular even though the factorization went through.
    const RVector pivots = factor.toDenseMatrix().diagonal().real();
    if (pivots.minCoeff() <= 1e-12 * pivots.maxCoeff()) {
        throw SingularCovariance("covariance matrix is numerically singular");
    }
    CMatrix whitened = factor.solve(b);
    whitened = factor.solve(whitened.adjoint()).adjoint();
    whitened = 0.5 * (whitened + whitened.adjoint()).eval();
    const Eigen::SelfAdjointEigenSolver<CMatrix> solver(whitened, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericError("Hermitian eigensolver did not converge");
    }
    return solver.eigenvalues().reverse();
}

RVector symmetric_eigenvalues_desc(const RMatrix& a) {
    const Eigen::SelfAdjointEigenSolver<RMatrix> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericError("symmetric eigensolver did not converge");
    }
    return solver.eigenvalues().reverse();
}

double condition_number(const RMatrix& a) {
    const RVector ev = symmetric_eigenvalues_desc(a);
    const double smallest = ev(ev.size() - 1);
    if (!(smallest > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return ev(0) / smallest;
}

}  // namespace covtest

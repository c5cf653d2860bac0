#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace genprior {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// (M + Mᵀ) / 2.
Matrix symmetrized(const Matrix& m);

/// Cholesky factor of a symmetric positive definite matrix. The input is
/// symmetrized first. If the plain factorization fails, a diagonal jitter
/// of 1e-12·trace/n is added and multiplied by ten until it succeeds or
/// exceeds 1e-6·trace/n, at which point NumericalError is thrown.
class SpdFactor {
public:
    explicit SpdFactor(const Matrix& m);

    Vector solve(const Vector& b) const { return llt_.solve(b); }
    Matrix solve(const Matrix& b) const { return llt_.solve(b); }
    Matrix inverse() const;
    /// log det of the (possibly jittered) matrix.
    double log_det() const;
    /// Lower-triangular L with M = L Lᵀ.
    Matrix lower() const { return llt_.matrixL(); }
    /// L⁻¹ b, so that bᵀ M⁻¹ b = ‖L⁻¹ b‖².
    Vector solve_lower(const Vector& b) const { return llt_.matrixL().solve(b); }
    Eigen::Index size() const { return llt_.rows(); }
    /// Jitter that was added to the diagonal, zero when none was needed.
    double jitter() const { return jitter_; }

private:
    Eigen::LLT<Matrix> llt_;
    double jitter_ = 0.0;
};

/// Number of singular values above rel_tol · σ₁.
Eigen::Index numerical_rank(const Matrix& m, double rel_tol);

/// Singular values in decreasing order.
Vector singular_values(const Matrix& m);

/// Eigenvalues of the symmetrized matrix, increasing.
Vector symmetric_eigenvalues(const Matrix& m);

/// Unbiased sample covariance of the rows of `samples`.
Matrix sample_covariance(const Matrix& samples);

}  // namespace genprior

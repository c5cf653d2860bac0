#include "genprior/linalg.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "genprior/errors.hpp"

namespace genprior {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

SpdFactor::SpdFactor(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw InvalidArgument("SpdFactor: matrix is not square");
    }
    Matrix s = symmetrized(m);
    llt_.compute(s);
    if (llt_.info() == Eigen::Success) return;

    const double n = static_cast<double>(s.rows());
    const double scale = std::max(std::abs(s.trace()) / n, 1e-300);
    for (double rel = 1e-12; rel <= 1e-6 * (1.0 + 1e-9); rel *= 10.0) {
        jitter_ = rel * scale;
        Matrix jittered = s;
        jittered.diagonal().array() += jitter_;
        llt_.compute(jittered);
        if (llt_.info() == Eigen::Success) return;
    }
    throw NumericalError("Cholesky factorization failed after jitter escalation (n=" +
                         std::to_string(s.rows()) + ")");
}

Matrix SpdFactor::inverse() const {
    return symmetrized(llt_.solve(Matrix::Identity(llt_.rows(), llt_.rows())));
}

double SpdFactor::log_det() const {
    const Matrix& l = llt_.matrixLLT();
    return 2.0 * l.diagonal().array().log().sum();
}

Vector singular_values(const Matrix& m) {
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues();
}

Eigen::Index numerical_rank(const Matrix& m, double rel_tol) {
    const Vector sv = singular_values(m);
    if (sv.size() == 0 || sv[0] == 0.0) return 0;
    const double thresh = rel_tol * sv[0];
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > thresh) ++r;
    }
    return r;
}

Vector symmetric_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

Matrix sample_covariance(const Matrix& samples) {
    const Eigen::Index n = samples.rows();
    if (n < 2) throw InvalidArgument("sample_covariance: need at least two rows");
    const Eigen::RowVectorXd mean = samples.colwise().mean();
    const Matrix centered = samples.rowwise() - mean;
    return (centered.transpose() * centered) / static_cast<double>(n - 1);
}

}  // namespace genprior

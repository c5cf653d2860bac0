#include "genprior/gaussian.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "genprior/errors.hpp"

namespace genprior {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

Covariance Covariance::isotropic(Eigen::Index dim, double variance) {
    if (!(variance > 0.0) || dim <= 0) throw InvalidArgument("isotropic covariance needs variance > 0");
    Covariance c;
    c.kind_ = CovKind::isotropic;
    c.dim_ = dim;
    c.iso_ = variance;
    return c;
}

Covariance Covariance::diagonal(Vector variances) {
    if (variances.size() == 0 || !(variances.array() > 0.0).all()) {
        throw InvalidArgument("diagonal covariance needs strictly positive variances");
    }
    Covariance c;
    c.kind_ = CovKind::diagonal;
    c.dim_ = variances.size();
    c.diag_ = std::move(variances);
    return c;
}

Covariance Covariance::full(const Matrix& cov) {
    if (cov.rows() != cov.cols() || cov.rows() == 0) throw InvalidArgument("full covariance must be square");
    Covariance c;
    c.kind_ = CovKind::full;
    c.dim_ = cov.rows();
    c.full_ = symmetrized(cov);
    Eigen::LLT<Matrix> llt(c.full_);
    if (llt.info() != Eigen::Success) throw NumericalError("full covariance is not positive definite");
    c.chol_lower_ = llt.matrixL();
    return c;
}

Matrix Covariance::dense() const {
    switch (kind_) {
        case CovKind::isotropic: return iso_ * Matrix::Identity(dim_, dim_);
        case CovKind::diagonal: return diag_.asDiagonal();
        case CovKind::full: return full_;
    }
    return {};
}

Vector Covariance::diagonal_entries() const {
    switch (kind_) {
        case CovKind::isotropic: return Vector::Constant(dim_, iso_);
        case CovKind::diagonal: return diag_;
        case CovKind::full: return full_.diagonal();
    }
    return {};
}

double Covariance::log_det() const {
    switch (kind_) {
        case CovKind::isotropic: return static_cast<double>(dim_) * std::log(iso_);
        case CovKind::diagonal: return diag_.array().log().sum();
        case CovKind::full: return 2.0 * chol_lower_.diagonal().array().log().sum();
    }
    return 0.0;
}

Vector Covariance::solve(const Vector& b) const {
    switch (kind_) {
        case CovKind::isotropic: return b / iso_;
        case CovKind::diagonal: return b.cwiseQuotient(diag_);
        case CovKind::full: {
            const auto l = chol_lower_.triangularView<Eigen::Lower>();
            return l.transpose().solve(l.solve(b));
        }
    }
    return {};
}

Matrix Covariance::solve(const Matrix& b) const {
    switch (kind_) {
        case CovKind::isotropic: return b / iso_;
        case CovKind::diagonal: return diag_.cwiseInverse().asDiagonal() * b;
        case CovKind::full: {
            const auto l = chol_lower_.triangularView<Eigen::Lower>();
            return l.transpose().solve(l.solve(b));
        }
    }
    return {};
}

double Covariance::quad_form(const Vector& b) const {
    switch (kind_) {
        case CovKind::isotropic: return b.squaredNorm() / iso_;
        case CovKind::diagonal: return (b.array().square() / diag_.array()).sum();
        case CovKind::full: {
            const Vector w = chol_lower_.triangularView<Eigen::Lower>().solve(b);
            return w.squaredNorm();
        }
    }
    return 0.0;
}

Vector Covariance::transform_standard(const Vector& eps) const {
    switch (kind_) {
        case CovKind::isotropic: return std::sqrt(iso_) * eps;
        case CovKind::diagonal: return diag_.cwiseSqrt().cwiseProduct(eps);
        case CovKind::full: return chol_lower_.triangularView<Eigen::Lower>() * eps;
    }
    return {};
}

double Covariance::min_eigenvalue() const {
    switch (kind_) {
        case CovKind::isotropic: return iso_;
        case CovKind::diagonal: return diag_.minCoeff();
        case CovKind::full: return symmetric_eigenvalues(full_)[0];
    }
    return 0.0;
}

double GaussianDist::log_pdf(const Vector& x) const {
    const Vector r = x - mean;
    return -0.5 * (static_cast<double>(mean.size()) * kLog2Pi + cov.log_det() + cov.quad_form(r));
}

Vector GaussianDist::sample(CounterRng& rng) const {
    return mean + cov.transform_standard(rng.normal_vector(mean.size()));
}

double gaussian_log_pdf(const Vector& x, const Vector& mean, const SpdFactor& cov_factor) {
    const Vector r = x - mean;
    const Vector w = cov_factor.solve_lower(r);
    return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + cov_factor.log_det() + w.squaredNorm());
}

}  // namespace genprior

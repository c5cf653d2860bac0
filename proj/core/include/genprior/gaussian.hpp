#pragma once

#include <variant>

#include "genprior/linalg.hpp"
#include "genprior/rng.hpp"

namespace genprior {

enum class CovKind { isotropic, diagonal, full };

/// Symmetric positive definite covariance stored in its natural structure.
/// Isotropic keeps one variance, diagonal keeps the variances, full keeps the
/// dense matrix plus its Cholesky factor (computed once at construction).
class Covariance {
public:
    static Covariance isotropic(Eigen::Index dim, double variance);
    static Covariance diagonal(Vector variances);
    static Covariance full(const Matrix& cov);

    CovKind kind() const { return kind_; }
    Eigen::Index dim() const { return dim_; }

    Matrix dense() const;
    Vector diagonal_entries() const;
    double log_det() const;
    /// Γ⁻¹ b
    Vector solve(const Vector& b) const;
    /// Γ⁻¹ B
    Matrix solve(const Matrix& b) const;
    /// bᵀ Γ⁻¹ b
    double quad_form(const Vector& b) const;
    /// L ε with Γ = L Lᵀ; maps standard normals to N(0, Γ).
    Vector transform_standard(const Vector& eps) const;
    double min_eigenvalue() const;

private:
    Covariance() = default;

    CovKind kind_ = CovKind::isotropic;
    Eigen::Index dim_ = 0;
    double iso_ = 0.0;
    Vector diag_;
    Matrix full_;
    Matrix chol_lower_;
};

/// Multivariate normal N(mean, cov).
struct GaussianDist {
    Vector mean;
    Covariance cov;

    double log_pdf(const Vector& x) const;
    Vector sample(CounterRng& rng) const;
};

/// log N(x | mean, Σ) for a dense Σ, evaluated through its Cholesky factor.
double gaussian_log_pdf(const Vector& x, const Vector& mean, const SpdFactor& cov_factor);

}  // namespace genprior

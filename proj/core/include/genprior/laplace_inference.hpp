#pragma once

#include <cstdint>
#include <vector>

#include "genprior/forward_model.hpp"
#include "genprior/generator.hpp"
#include "genprior/optim.hpp"

namespace genprior {

/// x₀ = argmin σ⁻²‖A x − y‖² + ‖x − g(0)‖²_{Γ(0)⁻¹}, solved through the
/// normal equations (AᵀA + σ²Γ(0)⁻¹) x = Aᵀy + σ²Γ(0)⁻¹ g(0) by Cholesky.
Vector least_squares_init(const LinearModel& model, const Vector& y, const GeneratorNet& net);

/// Joint prior log-integrand log N(x | g(z), Γ(z)) + log N(z | 0, I) up to the
/// constant −(d+p)/2 · log 2π:
///   −½ [ log|Γ(z)| + zᵀz + (x − g(z))ᵀ Γ(z)⁻¹ (x − g(z)) ].
double expansion_log_integrand(const GeneratorNet& net, const Vector& x, const Vector& z);
double expansion_log_integrand(const GeneratorNet& net, const Vector& x, const Vector& z,
                               Vector& grad);

struct LatentSearchOptions {
    int restarts = 0;  ///< additional starts drawn from N(0, I)
    std::uint64_t seed = 0x5EED;
    BfgsOptions bfgs{};
};

/// argmax_z of expansion_log_integrand(net, x, z), BFGS started at the origin
/// (plus optional random restarts). Used when the generator has no encoder.
Vector latent_search(const GeneratorNet& net, const Vector& x, const LatentSearchOptions& opts = {});

/// ‖(I + JᵀΓ⁻¹J) z − JᵀΓ⁻¹(x − g(z) + J z)‖₂ with J, Γ evaluated at z.
double expansion_update_residual(const GeneratorNet& net, const Vector& x, const Vector& z);

struct ExpansionOptions {
    int max_iter = 100;
    double tol = 1e-10;  ///< stop when the log-integrand improves by less than this
    LatentSearchOptions search{};
};

struct ExpansionResult {
    Vector z0;         ///< accepted expansion point
    Vector x0;         ///< least-squares starting value in X
    Vector z_initial;  ///< z⁰ from the encoder or the latent search
    /// Log-integrand of the initial point followed by each accepted update;
    /// entry k is entry k−1 plus gains[k−1].
    std::vector<double> trace;
    /// Log-integrand increase of each accepted update, all strictly positive.
    std::vector<double> gains;
    int iterations = 0;  ///< accepted updates
    double residual = 0.0;  ///< expansion_update_residual at z0
    bool used_encoder = false;
};

/// expansion_log_integrand(net, x, z1) − expansion_log_integrand(net, x, z0)
/// evaluated from differences of the residuals, variances and latent norms, so
/// that gains far below the rounding level of the log-integrand keep their sign.
double expansion_log_integrand_gain(const GeneratorNet& net, const Vector& x, const Vector& z0, const Vector& z1);

/// Expansion-point scheme: x₀ by least squares, z⁰ from the encoder (or latent
/// search), then repeat the linear update
///   (I + JᵀΓ⁻¹J) z¹ = JᵀΓ⁻¹ (x₀ − g(z⁰) + J z⁰)
/// accepting z¹ only when it raises the log-integrand. Stops at the first
/// non-improving candidate, after an accepted improvement below `tol`, or
/// after `max_iter` updates.
ExpansionResult select_expansion_point(const LinearModel& model, const Vector& y,
                                       const GeneratorNet& net, const ExpansionOptions& opts = {});

/// Gaussian approximation of the generator prior around z0:
/// N(g(z0) − J z0, Γ(z0) + J Jᵀ).
struct LaplacePrior {
    Vector mean;
    Matrix cov;
    Vector z0;
};

LaplacePrior laplace_prior(const GeneratorNet& net, const Vector& z0);

struct LaplacePosterior {
    Vector mean;  ///< x̂
    Matrix cov;   ///< Ŝ
    LaplacePrior prior;
};

/// Ŝ = (σ⁻²AᵀA + C⁻¹)⁻¹ and x̂ = Ŝ[σ⁻²Aᵀy + C⁻¹ m] for the prior N(m, C).
/// Evaluated as σ²(AᵀA + σ²C⁻¹)⁻¹ with Cholesky factorizations.
LaplacePosterior laplace_posterior(const LinearModel& model, const Vector& y, LaplacePrior prior);

/// sqrt(diag Ŝ)
Vector marginal_pixel_std(const LaplacePosterior& post);

/// Ĉ = σ²(AᵀA)⁻¹ via a column-pivoted QR of A. Throws NumericalError if A is
/// rank deficient.
Matrix laplace_asymptotic_cov(const LinearModel& model);

struct LaplaceEstimate {
    ExpansionResult expansion;
    LaplacePosterior posterior;
};

/// select_expansion_point → laplace_prior → laplace_posterior.
LaplaceEstimate laplace_estimate(const LinearModel& model, const Vector& y, const GeneratorNet& net,
                                 const ExpansionOptions& opts = {});

}  // namespace genprior

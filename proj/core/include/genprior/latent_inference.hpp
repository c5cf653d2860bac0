#pragma once

#include <cstdint>

#include "genprior/forward_model.hpp"
#include "genprior/generator.hpp"
#include "genprior/optim.hpp"

namespace genprior {

/// Latent posterior π(z|y) ∝ exp(−‖A g(z) − y‖²/(2σ²)) N(z | 0, I).
/// Holds references; the model and net must outlive it.
class LatentPosterior {
public:
    LatentPosterior(const LinearModel& model, const GeneratorNet& net);

    const LinearModel& model() const { return *model_; }
    const GeneratorNet& net() const { return *net_; }

    /// −‖A g(z) − y‖²/(2σ²) − ‖z‖²/2, additive constant dropped.
    double log_density(const Vector& z, const Vector& y) const;
    /// −σ⁻² J_zᵀ Aᵀ (A g(z) − y) − z
    Vector log_density_grad(const Vector& z, const Vector& y) const;
    double log_density(const Vector& z, const Vector& y, Vector& grad) const;

private:
    const LinearModel* model_;
    const GeneratorNet* net_;
};

struct LatentMapResult {
    Vector z;
    double log_density = 0.0;
    int iterations = 0;
    double grad_inf_norm = 0.0;
    bool converged = false;
    BfgsStatus status = BfgsStatus::max_iterations;
};

/// BFGS maximization of the latent log density from z_init. Non-convergence is
/// reported in the result, never thrown.
LatentMapResult latent_map(const LatentPosterior& lp, const Vector& y, const Vector& z_init,
                           const BfgsOptions& opts = {});

enum class LatentInit {
    /// x₀ from least_squares_init, then z⁰ = f(x₀) (encoder) or latent search.
    least_squares_encoder,
    /// Start at the latent origin.
    origin,
};

struct LatentEstimateOptions {
    LatentInit init = LatentInit::least_squares_encoder;
    BfgsOptions bfgs{};
    /// Extra restarts of the latent search used when there is no encoder.
    int search_restarts = 0;
    std::uint64_t restart_seed = 0x5EED;
};

struct LatentEstimate {
    Vector x;  ///< g(z_map)
    LatentMapResult map;
    Vector z_init;
};

/// g(z_MAP).
LatentEstimate latent_estimate(const LatentPosterior& lp, const Vector& y,
                               const LatentEstimateOptions& opts = {});

struct LatentSamples {
    Matrix z;  ///< one retained state per row
    double acceptance_rate = 0.0;
    double proposal_scale = 0.0;
};

/// Random-walk Metropolis on π(z|y) started at the latent MAP (from the origin).
/// Proposals are N(0, s² H⁻¹) with H = σ⁻² JᵀAᵀAJ + I at the start point; s is
/// tuned toward 25% acceptance during a burn-in of n_samples/5 steps, then
/// frozen for the n_samples retained steps.
LatentSamples sample_latent_posterior(const LatentPosterior& lp, const Vector& y, int n_samples,
                                      std::uint64_t seed);

struct LatentPosteriorMean {
    Vector mean;  ///< (1/N) Σ g(zᵢ)
    /// Batch-means Monte-Carlo standard error per coordinate (zero when N < 20).
    Vector std_error;
    double acceptance_rate = 0.0;
};

LatentPosteriorMean latent_posterior_mean(const LatentPosterior& lp, const Vector& y, int n_samples,
                                          std::uint64_t seed);

/// Č = J (σ⁻² Jᵀ AᵀA J)⁻¹ Jᵀ at z_star. Throws NumericalError when the inner
/// p×p matrix is singular (model not identifiable at z_star).
Matrix latent_asymptotic_cov(const GeneratorNet& net, const Matrix& a, double sigma2,
                             const Vector& z_star);

}  // namespace genprior

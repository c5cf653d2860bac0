#pragma once

#include "genprior/generator.hpp"
#include "genprior/laplace_inference.hpp"
#include "genprior/linalg.hpp"
#include "genprior/optim.hpp"

namespace genprior {

/// Inverse-Gamma prior on the noise variance, written with the scale inside the
/// exponent as π(σ²) ∝ (σ²)^(−1−α) exp(−β / (2σ²)). With this convention the
/// variance integrates out to the bracket (‖residual‖² + β)^(−(n+2α)/2).
/// In the conventional IG(α, b) form, b = β/2.
struct IGPrior {
    double alpha = 1.0;
    double beta = 1e-4;

    IGPrior() = default;
    IGPrior(double alpha, double beta);

    /// Prior whose mean (β/2)/(α−1) tends to sigma2 as α grows: β = 2ασ².
    static IGPrior concentrated_at(double sigma2, double alpha);
};

/// −(n+2α)/2 · log(‖A g(z) − y‖² + β) − ‖z‖²/2
double marginal_latent_log_density(const GeneratorNet& net, const Matrix& a, const Vector& y,
                                   const IGPrior& ig, const Vector& z);

/// −(n+2α)/2 · log(‖A x − y‖² + β) + log N(x | prior.mean, prior.cov)
double marginal_variable_log_density(const Matrix& a, const Vector& y, const IGPrior& ig,
                                     const LaplacePrior& prior, const Vector& x);

/// Variable-space marginal with the prior covariance factorized once, for
/// repeated evaluation during optimization.
class VariableMarginal {
public:
    VariableMarginal(const Matrix& a, const Vector& y, const IGPrior& ig, const LaplacePrior& prior);

    double log_density(const Vector& x) const;
    double log_density(const Vector& x, Vector& grad) const;

private:
    const Matrix* a_;
    Vector y_;
    IGPrior ig_;
    Vector prior_mean_;
    SpdFactor prior_factor_;
};

struct MarginalMapResult {
    Vector x;
    double log_density = 0.0;
    int iterations = 0;
    double grad_inf_norm = 0.0;
    bool converged = false;
    BfgsStatus status = BfgsStatus::max_iterations;
};

/// BFGS maximization of the variable-space marginal with its analytic gradient.
MarginalMapResult marginal_variable_map(const Matrix& a, const Vector& y, const IGPrior& ig,
                                        const LaplacePrior& prior, const Vector& x_init,
                                        const BfgsOptions& opts = {});

}  // namespace genprior

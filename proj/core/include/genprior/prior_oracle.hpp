#pragma once

#include <cstdint>

#include "genprior/forward_model.hpp"
#include "genprior/generator.hpp"
#include "genprior/laplace_inference.hpp"

namespace genprior {

struct PriorEstimate {
    double log_value = 0.0;  ///< log of the Monte-Carlo average
    double std_error = 0.0;  ///< delta-method standard error of log_value
    int n_samples = 0;
};

/// log π(x) with π(x) = ∫ N(x | g(z), Γ(z)) N(z | 0, I) dz, estimated by
/// averaging the integrand over zᵢ ~ N(0, I) with a log-sum-exp reduction.
/// Requires n_samples ≥ 100.
PriorEstimate mc_log_prior(const GeneratorNet& net, const Vector& x, int n_samples, std::uint64_t seed);

/// log-sum-exp of a vector; −inf for an empty input.
double log_sum_exp(const Vector& v);

struct PosteriorMoments {
    Vector mean;
    Matrix cov;
    Vector std_error;  ///< self-normalized IS standard error of each mean coordinate
    double ess = 0.0;  ///< (Σw)² / Σw²
    bool low_ess = false;  ///< ESS < 50
    int n_samples = 0;
};

struct PosteriorOracleOptions {
    /// z-draws used inside each prior evaluation.
    int inner_samples = 256;
    ExpansionOptions expansion{};
};

/// Self-normalized importance sampling of π(x|y) ∝ N(y | A x, σ²I) π(x) with the
/// Laplace posterior as proposal. π(x) is replaced by an independent
/// mc_log_prior estimate per draw, which keeps the estimator consistent.
/// Intended for d ≤ 10.
PosteriorMoments mc_posterior_moments(const LinearModel& model, const Vector& y,
                                      const GeneratorNet& net, int n_samples, std::uint64_t seed,
                                      const PosteriorOracleOptions& opts = {});

}  // namespace genprior
